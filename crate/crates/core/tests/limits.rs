use caputo_pme::compactness::{constant_to_piecewise_gap, LinearInterpolant};
use caputo_pme::quadrature::singular_weighted;
use caputo_pme::{build_weights, gamma_fn, FractionalOrder, LpExponent, SampledPath, TimeGrid};

#[test]
fn weight_density_converges_weakly_against_cosine() {
    let alpha = 0.5;
    let order = FractionalOrder::new(alpha).unwrap();
    let limit = singular_weighted(1.0, -alpha, 256, f64::cos) / (gamma_fn(alpha).unwrap() * gamma_fn(1.0 - alpha).unwrap());
    let errs: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&n| {
            let grid = TimeGrid::from_horizon(1.0, n).unwrap();
            let w = build_weights(order, n).unwrap();
            let tau = grid.tau();
            let s: f64 = (1..=n)
                .map(|k| tau.powf(-alpha) * w.lambda(k) * (grid.time(k).sin() - grid.time(k - 1).sin()))
                .sum();
            (s - limit).abs()
        })
        .collect();
    assert!(errs.windows(2).all(|p| p[1] < p[0]), "{errs:?}");
}

#[test]
fn interpolant_gap_vanishes_for_sine_samples() {
    for p in [LpExponent::One, LpExponent::Two, LpExponent::Inf] {
        let gaps: Vec<f64> = [16, 32, 64, 128, 256]
            .iter()
            .map(|&n| {
                let grid = TimeGrid::from_horizon(1.0, n).unwrap();
                let interp = LinearInterpolant::new(SampledPath::from_fn(grid, f64::sin));
                constant_to_piecewise_gap(&interp, p).unwrap().gap
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{p}: {gaps:?}");
    }
}
