use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Graph;
use crate::stats::least_squares;

/// Fewest tail points a power-law fit accepts.
pub const MIN_TAIL: usize = 50;

/// Node count per degree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    pub counts: BTreeMap<usize, usize>,
}

impl DegreeDistribution {
    pub fn from_degrees(degrees: impl IntoIterator<Item = usize>) -> Self {
        let mut counts = BTreeMap::new();
        for k in degrees {
            *counts.entry(k).or_insert(0) += 1;
        }
        Self { counts }
    }

    /// Adds every count of `other` (pooling networks of an ensemble).
    pub fn pool(&mut self, other: &DegreeDistribution) {
        for (&k, &c) in &other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
    }

    pub fn nodes(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn mean_degree(&self) -> Option<f64> {
        let n = self.nodes();
        (n > 0).then(|| self.counts.iter().map(|(&k, &c)| (k * c) as f64).sum::<f64>() / n as f64)
    }

    pub fn mode(&self) -> Option<usize> {
        // smallest degree among the most frequent ones
        self.counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&k, _)| k)
    }

    /// Normalized distribution `P(k)`.
    pub fn probabilities(&self) -> BTreeMap<usize, f64> {
        let n = self.nodes() as f64;
        self.counts.iter().map(|(&k, &c)| (k, c as f64 / n)).collect()
    }

    /// `P(k)` averaged over each logarithmic bin (degree 0 is left out).
    pub fn log_binned(&self, ratio: f64) -> Vec<Bin> {
        let n = self.nodes() as f64;
        let Some(&max) = self.counts.keys().next_back() else {
            return Vec::new();
        };
        log_bin_edges(max, ratio)
            .into_iter()
            .filter_map(|(lo, hi)| {
                let count: usize = self.counts.range(lo..=hi).map(|(_, &c)| c).sum();
                (count > 0).then(|| Bin {
                    k: ((lo * hi) as f64).sqrt(),
                    value: count as f64 / (n * (hi - lo + 1) as f64),
                    count,
                })
            })
            .collect()
    }
}

/// One row of a binned curve: geometric bin centre, value, nodes in the bin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub k: f64,
    pub value: f64,
    pub count: usize,
}

/// Inclusive integer bins `[ceil(b^i), ceil(b^(i+1)) - 1]` covering `1..=max`.
pub fn log_bin_edges(max: usize, ratio: f64) -> Vec<(usize, usize)> {
    assert!(ratio > 1.0, "bin ratio must exceed 1");
    let mut bins = Vec::new();
    let mut lo = 1usize;
    let mut edge = 1.0f64;
    while lo <= max {
        edge *= ratio;
        let next = (edge - 1e-9).ceil() as usize;
        if next > lo {
            bins.push((lo, next - 1));
            lo = next;
        }
    }
    bins
}

/// Averages `(degree, value)` points inside logarithmic degree bins.
pub fn bin_by_degree(points: impl IntoIterator<Item = (usize, f64)>, ratio: f64) -> Vec<Bin> {
    let mut per_degree: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (k, v) in points {
        if k > 0 {
            let e = per_degree.entry(k).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    let Some(&max) = per_degree.keys().next_back() else {
        return Vec::new();
    };
    log_bin_edges(max, ratio)
        .into_iter()
        .filter_map(|(lo, hi)| {
            let (sum, count) = per_degree
                .range(lo..=hi)
                .fold((0.0, 0), |acc, (_, &(s, c))| (acc.0 + s, acc.1 + c));
            (count > 0).then(|| Bin {
                k: ((lo * hi) as f64).sqrt(),
                value: sum / count as f64,
                count,
            })
        })
        .collect()
}

pub fn degree_distribution(graph: &Graph) -> DegreeDistribution {
    DegreeDistribution::from_degrees(graph.degrees())
}

/// Hurwitz zeta `sum_{k>=0} (q + k)^-s` for `s > 1`, `q > 0`, by
/// Euler-Maclaurin summation after ten explicit terms.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    const N: usize = 10;
    // B_2j / (2j)!
    const COEF: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    debug_assert!(s > 1.0 && q > 0.0);
    let head: f64 = (0..N).map(|k| (q + k as f64).powf(-s)).sum();
    let a = q + N as f64;
    let mut tail = a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // rising factorial s (s+1) ... (s+2j-2) times a^(-s-2j+1)
    let mut factor = s * a.powf(-s - 1.0);
    for (j, c) in COEF.iter().enumerate() {
        tail += c * factor;
        let m = 2.0 * j as f64;
        factor *= (s + m + 1.0) * (s + m + 2.0) / (a * a);
    }
    head + tail
}

/// Outcome of a successful power-law fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub gamma: f64,
    pub error: f64,
    pub k_min: usize,
    /// Nodes with degree `>= k_min`.
    pub tail: usize,
    pub ks_distance: f64,
    /// Least-squares slope of log-binned `P(k)` on log-log axes (negated),
    /// reported alongside as a cross-check.
    pub binned_gamma: Option<f64>,
}

/// Why no exponent could be fitted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unfittable {
    pub reason: String,
}

struct Tail {
    /// distinct degrees `>= k_min` with their counts
    values: Vec<(usize, usize)>,
    n: usize,
    log_sum: f64,
}

fn mle_gamma(tail: &Tail, k_min: usize) -> f64 {
    let q = k_min as f64;
    let nll = |g: f64| tail.n as f64 * hurwitz_zeta(g, q).ln() + g * tail.log_sum;
    // golden-section search; the negative log-likelihood is convex in gamma
    let (mut a, mut b) = (1.0 + 1e-6, 10.0);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (nll(c), nll(d));
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = nll(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = nll(d);
        }
    }
    0.5 * (a + b)
}

fn ks_distance(tail: &Tail, k_min: usize, gamma: f64) -> f64 {
    let norm = hurwitz_zeta(gamma, k_min as f64);
    let model_cdf = |k: usize| 1.0 - hurwitz_zeta(gamma, (k + 1) as f64) / norm;
    let n = tail.n as f64;
    let mut cum = 0usize;
    let mut prev = k_min;
    let mut d: f64 = 0.0;
    for &(k, c) in &tail.values {
        if k > prev {
            // just below k the empirical CDF still equals the previous step
            d = d.max((cum as f64 / n - model_cdf(k - 1)).abs());
        }
        cum += c;
        d = d.max((cum as f64 / n - model_cdf(k)).abs());
        prev = k;
    }
    d
}

fn tail_above(dist: &DegreeDistribution, k_min: usize) -> Tail {
    let values: Vec<(usize, usize)> = dist.counts.range(k_min..).map(|(&k, &c)| (k, c)).collect();
    Tail {
        n: values.iter().map(|v| v.1).sum(),
        log_sum: values.iter().map(|&(k, c)| c as f64 * (k as f64).ln()).sum(),
        values,
    }
}

/// Discrete power-law fit `P(k) ~ k^-gamma` for `k >= k_min` by maximum
/// likelihood, with `k_min` chosen among the observed degrees to minimize the
/// Kolmogorov-Smirnov distance. The error is the inverse square root of the
/// observed Fisher information.
pub fn fit_degree_exponent(dist: &DegreeDistribution) -> Result<PowerLawFit, Unfittable> {
    let mut best: Option<PowerLawFit> = None;
    for &k_min in dist.counts.keys().filter(|&&k| k >= 1) {
        let tail = tail_above(dist, k_min);
        if tail.n < MIN_TAIL || tail.values.len() < 2 {
            // tails only shrink as k_min grows
            break;
        }
        let gamma = mle_gamma(&tail, k_min);
        let ks = ks_distance(&tail, k_min, gamma);
        if best.map_or(true, |b| ks < b.ks_distance) {
            let h = 1e-3;
            let f = |g: f64| hurwitz_zeta(g, k_min as f64).ln();
            let curvature = (f(gamma + h) - 2.0 * f(gamma) + f(gamma - h)) / (h * h);
            best = Some(PowerLawFit {
                gamma,
                error: 1.0 / (tail.n as f64 * curvature).sqrt(),
                k_min,
                tail: tail.n,
                ks_distance: ks,
                binned_gamma: None,
            });
        }
    }
    let mut fit = best.ok_or_else(|| Unfittable {
        reason: format!("fewer than {MIN_TAIL} nodes over at least two distinct degrees"),
    })?;
    let bins: Vec<Bin> = dist
        .log_binned(2.0)
        .into_iter()
        .filter(|b| b.k >= fit.k_min as f64)
        .collect();
    let xs: Vec<f64> = bins.iter().map(|b| b.k.ln()).collect();
    let ys: Vec<f64> = bins.iter().map(|b| b.value.ln()).collect();
    fit.binned_gamma = least_squares(&xs, &ys).map(|l| -l.slope);
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hurwitz_zeta_known_values() {
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((hurwitz_zeta(2.0, 1.0) - pi2_6).abs() < 1e-14);
        assert!((hurwitz_zeta(2.0, 3.0) - (pi2_6 - 1.25)).abs() < 1e-14);
        // zeta(2.5) = 1.341487257250917...
        assert!((hurwitz_zeta(2.5, 1.0) - 1.341_487_257_250_917).abs() < 1e-13);
        assert!((hurwitz_zeta(4.0, 1.0) - std::f64::consts::PI.powi(4) / 90.0).abs() < 1e-14);
        // zeta(3, 500) = zeta(3) - sum_{k<500} k^-3, zeta(3) = 1.2020569031595942...
        let head: f64 = (1..500).map(|k| (k as f64).powi(-3)).sum();
        let expected = 1.202_056_903_159_594_2 - head;
        assert!((hurwitz_zeta(3.0, 500.0) - expected).abs() / expected < 1e-9);
        // shift identity
        assert!((hurwitz_zeta(2.7, 3.0) - hurwitz_zeta(2.7, 4.0) - 3f64.powf(-2.7)).abs() < 1e-15);
    }

    #[test]
    fn fixtures() {
        let triangle = Graph::from_edges(3, [(0, 1), (1, 2), (2, 0)]);
        assert_eq!(degree_distribution(&triangle).counts, BTreeMap::from([(2, 3)]));
        let star = Graph::from_edges(6, (1..6).map(|l| (0, l)));
        let d = degree_distribution(&star);
        assert_eq!(d.counts, BTreeMap::from([(1, 5), (5, 1)]));
        assert!((d.probabilities().values().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(d.mode(), Some(1));
    }

    #[test]
    fn degenerate_distribution_is_unfittable() {
        let d = DegreeDistribution::from_degrees(std::iter::repeat(6).take(1000));
        assert!(fit_degree_exponent(&d).is_err());
        let d = DegreeDistribution::from_degrees((1..40).collect::<Vec<_>>());
        assert!(fit_degree_exponent(&d).is_err());
    }

    #[test]
    fn bin_edges() {
        assert_eq!(log_bin_edges(9, 2.0), vec![(1, 1), (2, 3), (4, 7), (8, 15)]);
        assert_eq!(log_bin_edges(3, 1.5), vec![(1, 1), (2, 2), (3, 3)]);
        let d = DegreeDistribution::from_degrees([1, 2, 3, 3]);
        let bins = d.log_binned(2.0);
        assert_eq!(bins.len(), 2);
        assert!((bins[1].value - 3.0 / 4.0 / 2.0).abs() < 1e-15);
        let total: f64 = bins.iter().map(|b| b.value * if b.k < 1.5 { 1.0 } else { 2.0 }).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }
}
