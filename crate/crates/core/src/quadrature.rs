//! Gauss–Legendre rules and graded composite quadrature.

/// A Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct GaussRule {
    nodes: &'static [f64],
    weights: &'static [f64],
}

const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];
const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

pub const GAUSS4: GaussRule = GaussRule {
    nodes: &GL4_NODES,
    weights: &GL4_WEIGHTS,
};
pub const GAUSS8: GaussRule = GaussRule {
    nodes: &GL8_NODES,
    weights: &GL8_WEIGHTS,
};

impl GaussRule {
    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Composite rule over `cells` uniform cells of `[a, b]`.
pub fn composite(rule: GaussRule, a: f64, b: f64, cells: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / cells as f64;
    (0..cells)
        .map(|i| {
            let lo = a + i as f64 * h;
            rule.integrate(lo, lo + h, &f)
        })
        .sum()
}

/// Composite 4-point rule over `[0, 1]` whose first cell is further split
/// geometrically toward 0. Integrands like `w^q` with fractional `q` lose
/// smoothness only at `w = 0`, and the halving keeps that from limiting
/// accuracy.
fn composite_unit_refined(cells: usize, f: impl Fn(f64) -> f64) -> f64 {
    const LEVELS: i32 = 40;
    let h = 1.0 / cells as f64;
    let mut total = composite(GAUSS4, h, 1.0, cells - 1, &f);
    let mut hi = h;
    for _ in 0..LEVELS {
        let lo = 0.5 * hi;
        total += GAUSS4.integrate(lo, hi, &f);
        hi = lo;
    }
    total + GAUSS4.integrate(0.0, hi, &f)
}

/// `∫_0^len g(r) r^beta dr` for `beta > -1`, smooth `g`.
///
/// Substituting `r = len * w^(1/(1+beta))` turns the weight into a constant
/// Jacobian, so a uniform rule in `w` sees only `g`.
pub fn singular_weighted(
    len: f64,
    beta: f64,
    cells: usize,
    g: impl Fn(f64) -> f64,
) -> f64 {
    debug_assert!(beta > -1.0 && cells >= 1);
    if len <= 0.0 {
        return 0.0;
    }
    let q = 1.0 / (1.0 + beta);
    let scale = len.powf(1.0 + beta) / (1.0 + beta);
    scale * composite_unit_refined(cells, |w| g(len * w.powf(q)))
}

/// `∫_0^len g(r) dr` with nodes clustered at `r = 0` by `r = len * w^q`.
pub fn graded(len: f64, q: f64, cells: usize, g: impl Fn(f64) -> f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    composite_unit_refined(cells, |w| {
        let jac = len * q * w.powf(q - 1.0);
        g(len * w.powf(q)) * jac
    })
}
