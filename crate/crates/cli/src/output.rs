use std::fmt::Write as _;

use smpleak::bounds::BoundCurve;

pub const CSV_HEADER: &str = "n,cc_lower,il_lower,delta1_opt,delta2_opt,qil_upper";

/// `%.12g`: twelve significant digits, trailing zeros dropped, scientific
/// notation outside `[1e-4, 1e12)`.
pub fn sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{v:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn csv(curve: &BoundCurve) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &curve.rows {
        let cells = [r.n, r.cc_lower, r.il_lower, r.delta1_opt, r.delta2_opt, r.qil_upper].map(sig12);
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

type Series = (&'static str, &'static str, fn(&smpleak::bounds::BoundRow) -> f64);

const W: f64 = 720.0;
const H: f64 = 440.0;
const PAD: f64 = 56.0;

/// Polyline plot of the three curves on log-log axes. Non-positive values
/// break a curve.
pub fn svg(curve: &BoundCurve) -> String {
    let series: [Series; 3] = [
        ("cc_lower", "#1f77b4", |r| r.cc_lower),
        ("il_lower", "#d62728", |r| r.il_lower),
        ("qil_upper", "#2ca02c", |r| r.qil_upper),
    ];
    let xs: Vec<f64> = curve.rows.iter().map(|r| r.n.log10()).collect();
    let ys: Vec<f64> = curve
        .rows
        .iter()
        .flat_map(|r| series.iter().map(move |s| (s.2)(r)))
        .filter(|&v| v > 0.0)
        .map(f64::log10)
        .collect();
    let span = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-9 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = span(&xs);
    let (y0, y1) = span(&ys);
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {top} V{bottom} H{right}" fill="none" stroke="black"/>"#,
        top = PAD,
        bottom = H - PAD,
        right = W - PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">log10 n</text>"#,
        W / 2.0,
        H - PAD / 3.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" transform="rotate(-90 {} {})" text-anchor="middle">log10 bits</text>"#,
        PAD / 3.0,
        H / 2.0,
        PAD / 3.0,
        H / 2.0
    );
    for (x, anchor, label) in [(x0, "start", x0), (x1, "end", x1)] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}">{}</text>"#,
            px(x),
            H - PAD + 16.0,
            sig12((label * 100.0).round() / 100.0)
        );
    }
    for y in [y0, y1] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            PAD - 4.0,
            py(y) + 4.0,
            sig12((y * 100.0).round() / 100.0)
        );
    }
    for (k, (name, color, get)) in series.iter().enumerate() {
        let mut segments: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for (r, &x) in curve.rows.iter().zip(&xs) {
            let v = get(r);
            if v > 0.0 {
                segments.last_mut().expect("segment").push((px(x), py(v.log10())));
            } else if !segments.last().expect("segment").is_empty() {
                segments.push(Vec::new());
            }
        }
        for seg in segments.iter().filter(|seg| !seg.is_empty()) {
            let points: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                points.join(" ")
            );
        }
        let ly = PAD + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{lx2}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{tx}" y="{ty}">{name}</text>"#,
            lx = W - PAD - 120.0,
            lx2 = W - PAD - 96.0,
            tx = W - PAD - 90.0,
            ty = ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
