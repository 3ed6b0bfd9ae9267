use std::fmt::Write;

use polyguard_core::activation::Staircase;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;

/// Step plot of active vertex guards against the speed ratio.
pub fn staircase(s: &Staircase, r_max: f64) -> String {
    let x_max = if r_max > 0.0 { r_max } else { 1.0 };
    let y_max = s.vertex_guards.max(1) as f64;
    let x = |r: f64| PAD + r / x_max * (W - 2.0 * PAD);
    let y = |k: f64| H - PAD - k / y_max * (H - 2.0 * PAD);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<path d="M{:.2},{:.2}V{:.2}H{:.2}" fill="none" stroke="black"/>"#,
        PAD,
        PAD,
        H - PAD,
        W - PAD
    );
    for k in 0..=s.vertex_guards {
        let yy = y(k as f64);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{k}</text>"#, PAD - 6.0, yy + 4.0);
    }
    for i in 0..=4 {
        let r = x_max * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{:.2}</text>"#,
            x(r),
            H - PAD + 18.0,
            r
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">r</text>"#,
        W / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.2}" transform="rotate(-90 14 {:.2})" text-anchor="middle">active vertex guards</text>"#,
        H / 2.0,
        H / 2.0
    );
    let mut d = String::new();
    let start = s.points.first().map_or(0, |p| p.active);
    let _ = write!(d, "M{:.2},{:.2}", x(0.0), y(start as f64));
    for t in &s.thresholds {
        let _ = write!(d, "H{:.2}V{:.2}", x(t.r), y(t.active as f64));
    }
    let end = s.points.last().map_or(0.0, |p| p.r);
    let _ = write!(d, "H{:.2}", x(end));
    let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="steelblue" stroke-width="2"/>"#);
    for t in &s.thresholds {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"><title>r = {:.4}, {} active</title></circle>"#,
            x(t.r),
            y(t.active as f64),
            t.r,
            t.active
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use polyguard_core::activation::{StaircasePoint, Threshold};

    #[test]
    fn plot_has_one_marker_per_threshold() {
        let s = Staircase {
            points: vec![StaircasePoint { r: 0.0, active: 0 }, StaircasePoint { r: 1.0, active: 2 }],
            thresholds: vec![Threshold { r: 0.3, active: 1 }, Threshold { r: 0.8, active: 2 }],
            vertex_guards: 3,
            events: vec![],
        };
        let svg = staircase(&s, 1.0);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
