use num_complex::Complex64;
use qsvt::phase_solver::{Family, SolverOptions, FAMILY_NAMES};
use qsvt::qsp_core::{linspace, response_curve};
use qsvt_cli::{emit_svg, Channel, CliError, SvgStyle};

fn polyline_points(svg: &str, channel: &str) -> Vec<(f64, f64)> {
    let tag = format!("data-channel=\"{channel}\"");
    let line = svg.lines().find(|l| l.contains(&tag)).expect("channel present");
    let pts = line.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
    pts.split_whitespace()
        .map(|p| {
            let (x, y) = p.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect()
}

#[test]
fn two_points_give_one_polyline_per_channel() {
    let curve = [(-1.0, Complex64::new(0.5, 0.1)), (1.0, Complex64::new(-0.5, 0.2))];
    let svg = emit_svg(&curve, &SvgStyle::default()).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    for ch in ["re", "im", "abs2"] {
        assert_eq!(polyline_points(&svg, ch).len(), 2);
    }
    let only = SvgStyle { channels: vec![Channel::Im], ..SvgStyle::default() };
    assert_eq!(emit_svg(&curve, &only).unwrap().matches("<polyline").count(), 1);
}

#[test]
fn empty_curve_is_an_error() {
    assert!(matches!(emit_svg(&[], &SvgStyle::default()), Err(CliError::EmptyCurve)));
}

#[test]
fn out_of_range_values_are_clamped() {
    let style = SvgStyle { channels: vec![Channel::Abs2], ..SvgStyle::default() };
    let big = emit_svg(&[(0.0, Complex64::new(3.0, 0.0)), (1.0, Complex64::new(0.0, 0.0))], &style).unwrap();
    let one = emit_svg(&[(0.0, Complex64::new(1.0, 0.0)), (1.0, Complex64::new(0.0, 0.0))], &style).unwrap();
    let (yb, yo) = (polyline_points(&big, "abs2")[0].1, polyline_points(&one, "abs2")[0].1);
    assert!((yb - yo).abs() < 1e-2, "{yb} vs {yo}");
}

#[test]
fn sign_response_spans_the_band() {
    let seq = Family::parse("poly_sign", &[("d".to_string(), 19.0), ("k".to_string(), 10.0)].into())
        .unwrap()
        .phases(&SolverOptions::default())
        .unwrap();
    let curve = response_curve(&seq, &linspace(-1.0, 1.0, 400)).unwrap();
    let style = SvgStyle::default();
    let svg = emit_svg(&curve, &style).unwrap();
    let ys: Vec<f64> = polyline_points(&svg, "re").iter().map(|p| p.1).collect();
    let span = ys.iter().cloned().fold(f64::MIN, f64::max) - ys.iter().cloned().fold(f64::MAX, f64::min);
    // [-1, 1] fills the plot height minus the two margins.
    let unit = (style.height as f64 - 80.0) / 2.0;
    assert!(span >= 1.8 * unit - 1.0, "span {span} vs {}", 1.8 * unit);
}

#[test]
fn every_family_is_reachable_from_the_command_line() {
    for name in FAMILY_NAMES {
        let o = std::process::Command::new(env!("CARGO_BIN_EXE_qsvt"))
            .args(["phases", "--family", name])
            .output()
            .unwrap();
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
