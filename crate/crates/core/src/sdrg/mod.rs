//! Strong-disorder renormalization of the random transverse-field Ising model.
//!
//! The strongest local term is eliminated repeatedly until no degrees of
//! freedom are left:
//!
//! * **bond decimation** (`J_ij` largest): clusters `i` and `j` lock into one
//!   cluster with field `h_i h_j / J_ij` and moment `mu_i + mu_j`;
//! * **field decimation** (`h_i` largest): cluster `i` is frozen as a final
//!   ground-state cluster and its neighbours `j, k` gain the second-order
//!   coupling `J_ji J_ik / h_i`.
//!
//! Parallel bonds are merged with the maximum rule. Every generated term is
//! then no larger than the term that was decimated, which is what lets a
//! single max-heap drive the whole procedure.
//!
//! All magnitudes are kept as natural logarithms so that the products of
//! many small couplings never underflow.
//!
//! # Pruning
//!
//! Field decimation couples every pair of neighbours, so whole frozen regions
//! turn into cliques of extremely weak bonds. With uniform fields this happens
//! at the very first energy scale and the exact procedure needs memory
//! quadratic in the number of live clusters. By default a second-order bond is
//! therefore dropped when it is weaker than both endpoint fields by more than
//! [`DEFAULT_PRUNE_MARGIN`] (in natural-log units). Such a bond can only be
//! decimated after both endpoint clusters lose that much field through merges.
//! Pass `None` to [`run_sdrg_with`] for the exact procedure.

pub mod exact;
mod heap;

use smallvec::SmallVec;

use crate::decomposition::ClusterDecomposition;
use crate::error::{Error, Result};
use crate::lattice::{DisorderInstance, DisorderModel};
use heap::{Term, TermHeap};

type Neighbours = SmallVec<[(u32, f64); 4]>;

/// Log-scale margin below both endpoint fields under which new bonds are dropped.
pub const DEFAULT_PRUNE_MARGIN: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Live,
    Merged,
    Frozen,
}

/// Counters describing one renormalization run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SdrgStats {
    pub bond_decimations: usize,
    pub field_decimations: usize,
    pub stale_pops: usize,
    /// Largest number of neighbours a cluster had when its field was decimated.
    pub max_degree: usize,
    /// `degree_histogram[b]` counts field decimations of clusters whose
    /// degree `d` satisfies `2^(b-1) <= d < 2^b` (bucket 0 is `d = 0`).
    pub degree_histogram: Vec<usize>,
    pub peak_heap: usize,
}

/// Working state of the renormalization: effective fields and bonds of the
/// live clusters, their moments, and the merge forest over sites.
///
/// Clusters are identified by the index of one of their sites.
pub struct RgState {
    log_field: Vec<f64>,
    moment: Vec<u32>,
    status: Vec<Status>,
    parent: Vec<u32>,
    adj: Vec<Neighbours>,
    heap: TermHeap,
    scratch: Vec<(u32, f64, bool)>,
    stats: SdrgStats,
    prune_margin: Option<f64>,
}

impl RgState {
    /// Builds a state from explicit fields and bonds on `fields.len()` sites.
    /// Parallel bonds are merged with the maximum rule.
    pub fn new(fields: &[f64], bonds: &[(u32, u32, f64)]) -> Result<Self> {
        let n = fields.len();
        if let Some(h) = fields.iter().find(|&&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::parameter(format!("fields must be positive and finite, got {h}")));
        }
        let mut adj: Vec<Neighbours> = vec![Neighbours::new(); n];
        for &(a, b, j) in bonds {
            if a == b || a as usize >= n || b as usize >= n {
                return Err(Error::parameter(format!("invalid bond ({a}, {b})")));
            }
            if !(j > 0.0 && j.is_finite()) {
                if j == 0.0 {
                    continue;
                }
                return Err(Error::parameter(format!("bond strengths must be >= 0, got {j}")));
            }
            adj[a as usize].push((b, j.ln()));
            adj[b as usize].push((a, j.ln()));
        }
        for list in &mut adj {
            list.sort_unstable_by(|x, y| x.0.cmp(&y.0).then(y.1.total_cmp(&x.1)));
            list.dedup_by_key(|e| e.0);
        }
        let log_field: Vec<f64> = fields.iter().map(|h| h.ln()).collect();
        let mut heap = TermHeap::with_capacity(n + n / 2);
        for (i, lh) in log_field.iter().enumerate() {
            heap.push(Term::field(i as u32, *lh));
        }
        for (i, list) in adj.iter().enumerate() {
            for &(k, lj) in list {
                if (i as u32) < k && lj >= log_field[i].max(log_field[k as usize]) {
                    heap.push(Term::bond(i as u32, k, lj));
                }
            }
        }
        Ok(Self {
            log_field,
            moment: vec![1; n],
            status: vec![Status::Live; n],
            parent: (0..n as u32).collect(),
            adj,
            heap,
            scratch: Vec::new(),
            stats: SdrgStats::default(),
            prune_margin: Some(DEFAULT_PRUNE_MARGIN),
        })
    }

    /// Sets the pruning margin; `None` keeps every generated bond.
    pub fn with_prune_margin(mut self, margin: Option<f64>) -> Self {
        self.prune_margin = margin;
        self
    }

    pub fn from_instance(instance: &DisorderInstance) -> Result<Self> {
        let bonds: Vec<(u32, u32, f64)> = instance
            .spec
            .bond_endpoints()
            .map(|(b, s, t)| (s, t, instance.bonds[b]))
            .collect();
        Self::new(&instance.fields, &bonds)
    }

    pub fn is_live(&self, cluster: u32) -> bool {
        self.status[cluster as usize] == Status::Live
    }

    /// Current effective field of a live cluster.
    pub fn field(&self, cluster: u32) -> f64 {
        self.log_field[cluster as usize].exp()
    }

    pub fn moment(&self, cluster: u32) -> u32 {
        self.moment[cluster as usize]
    }

    /// Current effective bond between two live clusters, if any.
    pub fn bond(&self, a: u32, b: u32) -> Option<f64> {
        self.log_bond(a, b).map(f64::exp)
    }

    /// Live neighbours of a cluster with their bond strengths.
    pub fn neighbours(&self, cluster: u32) -> Vec<(u32, f64)> {
        self.adj[cluster as usize]
            .iter()
            .map(|&(k, lj)| (k, lj.exp()))
            .collect()
    }

    /// Live cluster containing `site`.
    pub fn cluster_of(&self, mut site: u32) -> u32 {
        while self.parent[site as usize] != site {
            site = self.parent[site as usize];
        }
        site
    }

    pub fn stats(&self) -> &SdrgStats {
        &self.stats
    }

    fn log_bond(&self, a: u32, b: u32) -> Option<f64> {
        let list = &self.adj[a as usize];
        list.binary_search_by_key(&b, |e| e.0).ok().map(|i| list[i].1)
    }

    fn push_bond_if_eligible(&mut self, a: u32, b: u32, lj: f64) {
        // A bond can only become the global maximum once it dominates both
        // endpoint fields. Fields only shrink and bonds only grow, so the
        // entry is (re)pushed whenever that condition newly holds.
        if lj >= self.log_field[a as usize].max(self.log_field[b as usize]) {
            self.heap.push(Term::bond(a, b, lj));
        }
    }

    /// Merges clusters `i` and `j` across their bond. Returns the id of the
    /// merged cluster.
    pub fn decimate_bond(&mut self, i: u32, j: u32) -> u32 {
        assert!(self.is_live(i) && self.is_live(j) && i != j);
        let lj = self.log_bond(i, j).expect("decimated bond must exist");
        let (lhi, lhj) = (self.log_field[i as usize], self.log_field[j as usize]);
        debug_assert!(lj >= lhi && lj >= lhj, "bond decimated while a field dominates");

        // keep the cluster with more neighbours to limit relinking work
        let (keep, gone) = if (self.adj[i as usize].len(), j) >= (self.adj[j as usize].len(), i) {
            (i, j)
        } else {
            (j, i)
        };
        let old_keep_field = self.log_field[keep as usize];
        let new_field = lhi + lhj - lj;
        debug_assert!(new_field <= lj);

        // merge the two neighbour lists, maximum rule on shared neighbours;
        // the flag records entries unchanged from `keep`'s own list
        let gone_list = std::mem::take(&mut self.adj[gone as usize]);
        let keep_list = &self.adj[keep as usize];
        let scratch = &mut self.scratch;
        scratch.clear();
        {
            let mut a = keep_list.iter().filter(|e| e.0 != gone).peekable();
            let mut b = gone_list.iter().filter(|e| e.0 != keep).peekable();
            loop {
                match (a.peek(), b.peek()) {
                    (Some(&&(ka, va)), Some(&&(kb, vb))) => {
                        if ka < kb {
                            scratch.push((ka, va, true));
                            a.next();
                        } else if kb < ka {
                            scratch.push((kb, vb, false));
                            b.next();
                        } else {
                            scratch.push((ka, va.max(vb), va >= vb));
                            a.next();
                            b.next();
                        }
                    }
                    (Some(&&(ka, va)), None) => {
                        scratch.push((ka, va, true));
                        a.next();
                    }
                    (None, Some(&&(kb, vb))) => {
                        scratch.push((kb, vb, false));
                        b.next();
                    }
                    (None, None) => break,
                }
            }
        }

        // relink neighbours of the absorbed cluster
        for &(k, v) in gone_list.iter().filter(|e| e.0 != keep) {
            let list = &mut self.adj[k as usize];
            let pos = list.binary_search_by_key(&gone, |e| e.0).expect("symmetric adjacency");
            list.remove(pos);
            match list.binary_search_by_key(&keep, |e| e.0) {
                Ok(p) => list[p].1 = list[p].1.max(v),
                Err(p) => list.insert(p, (keep, v)),
            }
        }
        // the bond itself disappears from keep's neighbours' view as well
        let keep_list = &mut self.adj[keep as usize];
        keep_list.clear();
        keep_list.extend(self.scratch.iter().map(|&(k, v, _)| (k, v)));

        self.status[gone as usize] = Status::Merged;
        self.parent[gone as usize] = keep;
        self.moment[keep as usize] += self.moment[gone as usize];
        self.log_field[keep as usize] = new_field;
        self.heap.push(Term::field(keep, new_field));

        for idx in 0..self.scratch.len() {
            let (k, v, from_keep) = self.scratch[idx];
            let lk = self.log_field[k as usize];
            let was_eligible = from_keep && v >= old_keep_field.max(lk);
            if !was_eligible {
                self.push_bond_if_eligible(keep, k, v);
            }
        }
        self.stats.bond_decimations += 1;
        keep
    }

    /// Freezes cluster `i` as a final cluster and couples its neighbours.
    pub fn decimate_site(&mut self, i: u32) {
        assert!(self.is_live(i));
        let lh = self.log_field[i as usize];
        let nb = std::mem::take(&mut self.adj[i as usize]);
        debug_assert!(nb.iter().all(|e| e.1 <= lh), "field decimated while a bond dominates");

        let degree = nb.len();
        self.stats.max_degree = self.stats.max_degree.max(degree);
        let bucket = (usize::BITS - degree.leading_zeros()) as usize;
        if self.stats.degree_histogram.len() <= bucket {
            self.stats.degree_histogram.resize(bucket + 1, 0);
        }
        self.stats.degree_histogram[bucket] += 1;

        for &(j, lji) in nb.iter() {
            let scratch = &mut self.scratch;
            scratch.clear();
            let old = &self.adj[j as usize];
            let mut a = old.iter().filter(|e| e.0 != i).peekable();
            let (fields, margin) = (&self.log_field, self.prune_margin.unwrap_or(f64::INFINITY));
            let floor_j = fields[j as usize] - margin;
            let mut b = nb
                .iter()
                .filter(|e| e.0 != j)
                .map(|&(k, lik)| (k, lji + lik - lh))
                .filter(|&(k, v)| v >= floor_j.min(fields[k as usize] - margin))
                .peekable();
            // flag: value changed (new bond or raised by the maximum rule)
            loop {
                match (a.peek(), b.peek()) {
                    (Some(&&(ka, va)), Some(&(kb, vb))) => {
                        if ka < kb {
                            scratch.push((ka, va, false));
                            a.next();
                        } else if kb < ka {
                            scratch.push((kb, vb, true));
                            b.next();
                        } else {
                            scratch.push((ka, va.max(vb), vb > va));
                            a.next();
                            b.next();
                        }
                    }
                    (Some(&&(ka, va)), None) => {
                        scratch.push((ka, va, false));
                        a.next();
                    }
                    (None, Some(&(kb, vb))) => {
                        scratch.push((kb, vb, true));
                        b.next();
                    }
                    (None, None) => break,
                }
            }
            let list = &mut self.adj[j as usize];
            list.clear();
            list.extend(self.scratch.iter().map(|&(k, v, _)| (k, v)));
            for idx in 0..self.scratch.len() {
                let (k, v, changed) = self.scratch[idx];
                if changed && j < k {
                    debug_assert!(v <= lh);
                    self.push_bond_if_eligible(j, k, v);
                }
            }
        }
        self.status[i as usize] = Status::Frozen;
        self.stats.field_decimations += 1;
    }

    /// Pops heap entries until a live term turns up.
    fn next_term(&mut self) -> Option<Term> {
        while let Some(t) = self.heap.pop() {
            let valid = if t.is_field() {
                self.is_live(t.a) && self.log_field[t.a as usize] == t.log_value
            } else {
                self.is_live(t.a) && self.is_live(t.b) && self.log_bond(t.a, t.b) == Some(t.log_value)
            };
            if valid {
                return Some(t);
            }
            self.stats.stale_pops += 1;
        }
        None
    }

    /// Decimates the globally largest term. Returns false once nothing is left.
    pub fn step(&mut self) -> bool {
        self.stats.peak_heap = self.stats.peak_heap.max(self.heap.len());
        match self.next_term() {
            Some(t) if t.is_field() => {
                self.decimate_site(t.a);
                true
            }
            Some(t) => {
                self.decimate_bond(t.a, t.b);
                true
            }
            None => false,
        }
    }

    pub fn run(&mut self) {
        while self.step() {}
    }

    /// Final cluster (root site) of every site; valid once [`run`](Self::run) finished.
    pub fn roots(&mut self) -> Vec<u32> {
        let n = self.parent.len();
        let mut roots = vec![0u32; n];
        for s in 0..n as u32 {
            let r = self.cluster_of(s);
            // compress
            let mut cur = s;
            while self.parent[cur as usize] != r {
                let next = self.parent[cur as usize];
                self.parent[cur as usize] = r;
                cur = next;
            }
            roots[s as usize] = r;
        }
        roots
    }
}

/// Result of [`run_sdrg_with_stats`].
pub struct SdrgRun {
    pub decomposition: ClusterDecomposition,
    pub stats: SdrgStats,
}

/// Ground-state cluster decomposition of a fixed-h or box-h instance.
pub fn run_sdrg(instance: &DisorderInstance) -> Result<ClusterDecomposition> {
    run_sdrg_with_stats(instance).map(|r| r.decomposition)
}

pub fn run_sdrg_with_stats(instance: &DisorderInstance) -> Result<SdrgRun> {
    run_sdrg_with(instance, Some(DEFAULT_PRUNE_MARGIN))
}

/// Runs the renormalization with an explicit pruning margin (`None` = exact).
pub fn run_sdrg_with(instance: &DisorderInstance, prune_margin: Option<f64>) -> Result<SdrgRun> {
    if matches!(instance.model, DisorderModel::Diluted { .. }) {
        return Err(Error::Variant(
            "the diluted model has percolation clusters; use percolation_clusters".into(),
        ));
    }
    let mut state = RgState::from_instance(instance)?.with_prune_margin(prune_margin);
    state.run();
    let roots = state.roots();
    let decomposition = ClusterDecomposition::from_roots(instance.spec, instance.seed, instance.model, &roots);
    Ok(SdrgRun {
        decomposition,
        stats: state.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::cluster_size_histogram;
    use crate::lattice::{sample_disorder, LatticeSpec, THETA_C};
    use proptest::prelude::*;

    fn lattice_instance(l: u32, fields: Vec<f64>, bonds: Vec<f64>) -> DisorderInstance {
        DisorderInstance {
            spec: LatticeSpec::new(l).unwrap(),
            model: DisorderModel::BoxH { theta: 0.0 },
            seed: 0,
            bonds,
            fields,
        }
    }

    #[test]
    fn weak_bonds_give_singletons() {
        let inst = lattice_instance(
            2,
            vec![1.0; 4],
            vec![0.01, 0.005, 0.002, 0.01, 0.007, 0.003, 0.001, 0.009],
        );
        let d = run_sdrg(&inst).unwrap();
        assert_eq!(d.cluster_count(), 4);
    }

    #[test]
    fn single_strong_bond_forms_a_pair() {
        // hand-executed: every h = 1 is decimated first, the induced bonds
        // are <= 1e-6, then J = 0.9 beats the surviving fields 0.1
        let spec = LatticeSpec::new(8).unwrap();
        let a = spec.index(3, 4);
        let b = spec.forward(a, 0);
        let mut fields = vec![1.0; 64];
        fields[a as usize] = 0.1;
        fields[b as usize] = 0.1;
        let mut bonds: Vec<f64> = (0..128).map(|k| 1e-4 + 1e-6 * (k as f64)).collect();
        bonds[2 * a as usize] = 0.9;
        let d = run_sdrg(&lattice_instance(8, fields, bonds)).unwrap();
        assert_eq!(d.label(a), d.label(b));
        assert_eq!(d.sizes()[d.label(a) as usize], 2);
        assert_eq!(d.cluster_count(), 63);
    }

    #[test]
    fn bond_rule_arithmetic() {
        let mut s = RgState::new(&[1.0, 1.0], &[(0, 1, 1.0)]).unwrap();
        let k = s.decimate_bond(0, 1);
        assert!((s.field(k) - 1.0).abs() < 1e-15);
        assert_eq!(s.moment(k), 2);

        let mut s = RgState::new(&[0.5, 0.4], &[(0, 1, 0.8)]).unwrap();
        let k = s.decimate_bond(0, 1);
        assert!((s.field(k) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn bond_rule_merges_neighbours_by_maximum() {
        // 2 - 0 = 1 - 3, with 2 also bonded to 1
        let mut s = RgState::new(
            &[0.1, 0.1, 0.1, 0.1],
            &[(0, 1, 0.9), (0, 2, 0.3), (1, 2, 0.5), (1, 3, 0.2)],
        )
        .unwrap();
        let k = s.decimate_bond(0, 1);
        assert!((s.bond(k, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!((s.bond(k, 3).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(s.neighbours(2).len(), 1);
        assert!(s.field(k) <= 0.1);
    }

    #[test]
    fn site_rule_arithmetic() {
        // isolated site
        let mut s = RgState::new(&[0.7], &[]).unwrap();
        s.decimate_site(0);
        assert!(!s.is_live(0));

        // chain j - i - k
        let mut s = RgState::new(&[0.1, 0.95, 0.1], &[(0, 1, 0.8), (1, 2, 0.9)]).unwrap();
        s.decimate_site(1);
        let j = s.bond(0, 2).unwrap();
        assert!((j - 0.8 * 0.9 / 0.95).abs() < 1e-12, "{j}");
        assert!((j - 0.75789).abs() < 1e-5);

        // with an existing stronger bond the maximum rule keeps it
        let mut s = RgState::new(&[0.1, 0.95, 0.1], &[(0, 1, 0.8), (1, 2, 0.9), (0, 2, 0.9)]).unwrap();
        s.decimate_site(1);
        assert!((s.bond(0, 2).unwrap() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn rules_agree_with_exact_diagonalization() {
        let (j, h1, h2) = (100.0, 1.0, 1.0);
        let mut s = RgState::new(&[h1, h2], &[(0, 1, j)]).unwrap();
        let k = s.decimate_bond(0, 1);
        let gap = exact::two_site_splitting(j, h1, h2);
        assert!((gap - 2.0 * s.field(k)).abs() / gap < 0.01);

        let (a, h, b) = (0.01, 1.0, 0.007);
        let mut s = RgState::new(&[0.5, h, 0.5], &[(0, 1, a), (1, 2, b)])
            .unwrap()
            .with_prune_margin(None);
        s.decimate_site(1);
        let exact = exact::chain_effective_bond(a, h, b);
        assert!((exact - s.bond(0, 2).unwrap()).abs() / exact < 0.02);
    }

    #[test]
    fn critical_histogram_matches_recount() {
        let spec = LatticeSpec::new(32).unwrap();
        let inst = sample_disorder(spec, DisorderModel::FixedH { theta: THETA_C }, 5).unwrap();
        let d = run_sdrg(&inst).unwrap();
        let hist = cluster_size_histogram(&d);
        // independent recount straight from the labels
        let mut per_label = std::collections::HashMap::<u32, u32>::new();
        for &l in d.labels() {
            *per_label.entry(l).or_default() += 1;
        }
        let mut recount = std::collections::BTreeMap::<u32, usize>::new();
        for (_, s) in per_label {
            *recount.entry(s).or_default() += 1;
        }
        assert_eq!(hist, recount);
        assert_eq!(hist.iter().map(|(s, c)| *s as usize * c).sum::<usize>(), 1024);
    }

    #[test]
    fn diluted_instances_are_rejected() {
        let spec = LatticeSpec::new(4).unwrap();
        let inst = sample_disorder(spec, DisorderModel::Diluted { p: 0.5 }, 0).unwrap();
        assert!(matches!(run_sdrg(&inst), Err(Error::Variant(_))));
    }

    #[test]
    fn strong_fields_and_strong_bonds_limit() {
        let spec = LatticeSpec::new(16).unwrap();
        // deep in the disordered phase everything is a singleton
        let inst = sample_disorder(spec, DisorderModel::FixedH { theta: 3.0 }, 1).unwrap();
        assert_eq!(run_sdrg(&inst).unwrap().cluster_count(), 256);
        // deep in the ordered phase one cluster spans the lattice
        let inst = sample_disorder(spec, DisorderModel::FixedH { theta: -8.0 }, 1).unwrap();
        assert_eq!(run_sdrg(&inst).unwrap().cluster_count(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn partition_determinism_and_scale_covariance(seed in any::<u64>(), theta in -1.0f64..0.6) {
            let spec = LatticeSpec::new(12).unwrap();
            let inst = sample_disorder(spec, DisorderModel::BoxH { theta }, seed).unwrap();
            let d = run_sdrg(&inst).unwrap();
            prop_assert_eq!(d.sizes().iter().map(|&s| s as usize).sum::<usize>(), 144);
            prop_assert_eq!(&run_sdrg(&inst).unwrap(), &d);

            let mut scaled = inst.clone();
            for v in scaled.bonds.iter_mut().chain(scaled.fields.iter_mut()) {
                *v *= 4.0;
            }
            let scaled = run_sdrg(&scaled).unwrap();
            prop_assert_eq!(scaled.labels(), d.labels());
        }

        #[test]
        fn pruning_matches_the_exact_procedure(seed in any::<u64>(), theta in -0.6f64..0.3, fixed in any::<bool>()) {
            let spec = LatticeSpec::new(16).unwrap();
            let model = if fixed { DisorderModel::FixedH { theta } } else { DisorderModel::BoxH { theta } };
            let inst = sample_disorder(spec, model, seed).unwrap();
            let exact = run_sdrg_with(&inst, None).unwrap();
            let pruned = run_sdrg_with(&inst, Some(DEFAULT_PRUNE_MARGIN)).unwrap();
            prop_assert_eq!(pruned.decomposition, exact.decomposition);
        }
    }
}
