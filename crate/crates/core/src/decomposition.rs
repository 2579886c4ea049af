//! Partition of lattice sites into ground-state clusters.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lattice::{DisorderModel, LatticeSpec};
use crate::textio::{self, Lines};

/// A label per site; sites sharing a label belong to the same cluster.
///
/// Labels are canonical: cluster ids are dense and numbered in order of the
/// first site (in row-major order) that belongs to them. Two decompositions
/// describe the same partition exactly when their label vectors are equal.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterDecomposition {
    spec: LatticeSpec,
    seed: u64,
    model: DisorderModel,
    labels: Vec<u32>,
    sizes: Vec<u32>,
}

impl ClusterDecomposition {
    /// Builds a canonical decomposition from arbitrary per-site group keys
    /// (e.g. union-find roots).
    pub fn from_roots(spec: LatticeSpec, seed: u64, model: DisorderModel, roots: &[u32]) -> Self {
        assert_eq!(roots.len(), spec.sites());
        let mut relabel = vec![u32::MAX; roots.len()];
        let mut labels = Vec::with_capacity(roots.len());
        let mut sizes: Vec<u32> = Vec::new();
        for &r in roots {
            let slot = &mut relabel[r as usize];
            if *slot == u32::MAX {
                *slot = sizes.len() as u32;
                sizes.push(0);
            }
            sizes[*slot as usize] += 1;
            labels.push(*slot);
        }
        Self {
            spec,
            seed,
            model,
            labels,
            sizes,
        }
    }

    /// Like [`from_roots`](Self::from_roots) but accepts any `u32` keys.
    pub fn from_labels(spec: LatticeSpec, seed: u64, model: DisorderModel, keys: &[u32]) -> Self {
        assert_eq!(keys.len(), spec.sites());
        let mut map: std::collections::HashMap<u32, u32> = Default::default();
        let mut next = 0u32;
        let dense: Vec<u32> = keys
            .iter()
            .map(|k| {
                *map.entry(*k).or_insert_with(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        Self::from_roots(spec, seed, model, &dense)
    }

    pub fn spec(&self) -> LatticeSpec {
        self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn model(&self) -> DisorderModel {
        self.model
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, site: u32) -> u32 {
        self.labels[site as usize]
    }

    /// Site count per cluster id.
    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn cluster_count(&self) -> usize {
        self.sizes.len()
    }

    /// Sites of each cluster, grouped by cluster id.
    pub fn members(&self) -> Vec<Vec<u32>> {
        let mut out: Vec<Vec<u32>> = self.sizes.iter().map(|&s| Vec::with_capacity(s as usize)).collect();
        for (site, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(site as u32);
        }
        out
    }

    /// Text form: header `L seed variant params`, then `x y cluster_id` per site.
    pub fn write(&self, path: &Path) -> Result<()> {
        textio::write_file(path, |w| self.write_to(w))
    }

    pub fn write_to(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "{} {} {}", self.spec.size(), self.seed, self.model)?;
        for (site, l) in self.labels.iter().enumerate() {
            let (x, y) = self.spec.coords(site as u32);
            writeln!(w, "{x} {y} {l}")?;
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = textio::read_to_string(path)?;
        Self::parse(&path.display().to_string(), &text)
    }

    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut lines = Lines::new(name, text);
        let (ln, header) = lines.expect_line("header")?;
        let [size, seed, variant, params] = lines.tokens(ln, header)?;
        let spec = LatticeSpec::new(lines.parse(ln, size)?)?;
        let seed = lines.parse(ln, seed)?;
        let model = DisorderModel::from_parts(variant, params)?;
        let mut keys = vec![u32::MAX; spec.sites()];
        for _ in 0..spec.sites() {
            let (ln, l) = lines.expect_line("site line")?;
            let [x, y, c] = lines.tokens(ln, l)?;
            let (x, y): (u32, u32) = (lines.parse(ln, x)?, lines.parse(ln, y)?);
            if x >= spec.size() || y >= spec.size() {
                return Err(lines.error(ln, "site outside the lattice"));
            }
            let c: u32 = lines.parse(ln, c)?;
            if c == u32::MAX {
                return Err(lines.error(ln, "cluster id out of range"));
            }
            keys[spec.index(x, y) as usize] = c;
        }
        if let Some((ln, _)) = lines.next_line() {
            return Err(lines.error(ln, "trailing content"));
        }
        if keys.contains(&u32::MAX) {
            return Err(Error::parse(lines.name(), 0, "missing site entries"));
        }
        Ok(Self::from_labels(spec, seed, model, &keys))
    }
}

/// Number of clusters of each size.
pub fn cluster_size_histogram(decomp: &ClusterDecomposition) -> BTreeMap<u32, usize> {
    let mut hist = BTreeMap::new();
    for &s in decomp.sizes() {
        *hist.entry(s).or_insert(0) += 1;
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> LatticeSpec {
        LatticeSpec::new(3).unwrap()
    }

    const MODEL: DisorderModel = DisorderModel::FixedH { theta: -0.5 };

    #[test]
    fn canonical_labels() {
        let d = ClusterDecomposition::from_labels(spec(), 0, MODEL, &[7, 7, 3, 9, 3, 3, 7, 1, 1]);
        assert_eq!(d.labels(), &[0, 0, 1, 2, 1, 1, 0, 3, 3]);
        assert_eq!(d.sizes(), &[3, 3, 1, 2]);
        let hist = cluster_size_histogram(&d);
        assert_eq!(hist, BTreeMap::from([(1, 1), (2, 1), (3, 2)]));
        assert_eq!(hist.iter().map(|(s, c)| *s as usize * c).sum::<usize>(), 9);
    }

    #[test]
    fn histogram_extremes() {
        let singles = ClusterDecomposition::from_roots(spec(), 0, MODEL, &(0..9).collect::<Vec<_>>());
        assert_eq!(cluster_size_histogram(&singles), BTreeMap::from([(1, 9)]));
        let one = ClusterDecomposition::from_roots(spec(), 0, MODEL, &[4; 9]);
        assert_eq!(cluster_size_histogram(&one), BTreeMap::from([(9, 1)]));
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let d = ClusterDecomposition::from_labels(spec(), 42, MODEL, &[5, 5, 2, 2, 8, 5, 1, 1, 1]);
        let mut buf = Vec::new();
        d.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("3 42 fixed-h theta=-0.5\n0 0 0\n"));
        let back = ClusterDecomposition::parse("mem", &text).unwrap();
        assert_eq!(back, d);
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        assert_eq!(again, text.as_bytes());
    }

    #[test]
    fn parse_reports_line_numbers() {
        let err = ClusterDecomposition::parse("f", "3 1 fixed-h theta=0\n0 0 0\n0 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }
}
