use caputo_pme::oracle::{ibp_continuous_terms, ContinuousIbpTerms, SmoothFunction};
use caputo_pme::{build_weights, discrete_ibp_terms, FractionalOrder, IbpTerms, SampledPath, TestFunction, TimeGrid};

const F: [f64; 4] = [1.0, 0.5, -0.8, 0.3];
const PHI: [f64; 3] = [0.7, 1.0, -0.4];

fn term_errors(d: &IbpTerms, c: &ContinuousIbpTerms) -> [f64; 4] {
    let scale = [c.lhs, c.interior, c.end, c.start].iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    [d.lhs - c.lhs, d.interior - c.interior, d.end - c.end, d.start - c.start].map(|e| e.abs() / scale)
}

fn errors_at(alpha: f64, n: usize) -> [f64; 4] {
    let order = FractionalOrder::new(alpha).unwrap();
    let f = SmoothFunction::polynomial(F.to_vec(), 1.0).unwrap();
    let phi = SmoothFunction::polynomial(PHI.to_vec(), 1.0).unwrap();
    let cont = ibp_continuous_terms(&f, &phi, order).unwrap();
    let grid = TimeGrid::from_horizon(1.0, n).unwrap();
    let w = build_weights(order, n).unwrap();
    let disc = discrete_ibp_terms(&SampledPath::from_fn(grid, |t| f.eval(t)), &TestFunction::Polynomial(PHI.to_vec()), &w).unwrap();
    term_errors(&disc, &cont)
}

#[test]
fn terms_within_five_percent_after_four_halvings() {
    for alpha in [0.5, 0.8] {
        let e = errors_at(alpha, 256);
        assert!(e.iter().all(|&x| x < 0.05), "alpha {alpha}: {e:?}");
    }
}

#[test]
fn boundary_terms_converge_monotonically() {
    // the lhs and interior errors can stall at small alpha; the boundary
    // terms only see the weights and improve at every halving
    for alpha in [0.3, 0.5, 0.8] {
        let errs: Vec<[f64; 4]> = [16, 32, 64, 128, 256].iter().map(|&n| errors_at(alpha, n)).collect();
        for w in errs.windows(2) {
            assert!(w[1][2] < w[0][2] && w[1][3] < w[0][3], "alpha {alpha}: {errs:?}");
        }
        let (first, last) = (errs[0], errs[4]);
        assert!(last[1] < first[1], "alpha {alpha}: {errs:?}");
        assert!(errs.iter().all(|e| e[0] < 0.01), "alpha {alpha}: {errs:?}");
    }
}
