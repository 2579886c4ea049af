//! Periodic square lattices and disorder realizations.
//!
//! Sites are indexed row-major, `site = y * L + x`. Every site owns the bond
//! to its `+x` neighbour (direction 0) and to its `+y` neighbour
//! (direction 1), so bond `2 * site + dir` is the unique bond between `site`
//! and its neighbour in direction `dir`; there are `2N` bonds in total.

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decomposition::ClusterDecomposition;
use crate::error::{Error, Result};
use crate::rng::{self, unit_open_closed};
use crate::textio::{self, Lines};
use crate::unionfind::UnionFind;

/// Critical control parameter of the fixed-h model on the square lattice.
pub const THETA_C: f64 = -0.17034;

/// Geometry of an `L x L` periodic square lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    size: u32,
}

impl LatticeSpec {
    pub fn new(size: u32) -> Result<Self> {
        if size < 2 {
            return Err(Error::parameter(format!("lattice size must be >= 2, got {size}")));
        }
        // Site indices are stored as u32.
        if (size as u64) * (size as u64) > u32::MAX as u64 / 2 {
            return Err(Error::parameter(format!("lattice size {size} is too large")));
        }
        Ok(Self { size })
    }

    /// Linear size `L`.
    pub fn size(&self) -> u32 {
        self.size
    }

    /// Number of sites `N = L^2`.
    pub fn sites(&self) -> usize {
        (self.size as usize) * (self.size as usize)
    }

    pub fn bonds(&self) -> usize {
        2 * self.sites()
    }

    pub fn index(&self, x: u32, y: u32) -> u32 {
        y * self.size + x
    }

    pub fn coords(&self, site: u32) -> (u32, u32) {
        (site % self.size, site / self.size)
    }

    /// Neighbour of `site` across its owned bond in direction `dir` (0 = +x, 1 = +y).
    pub fn forward(&self, site: u32, dir: usize) -> u32 {
        let (x, y) = self.coords(site);
        match dir {
            0 => self.index((x + 1) % self.size, y),
            _ => self.index(x, (y + 1) % self.size),
        }
    }

    /// Iterates `(bond index, a, b)` for every bond.
    pub fn bond_endpoints(&self) -> impl Iterator<Item = (usize, u32, u32)> + '_ {
        (0..self.sites() as u32).flat_map(move |s| (0..2).map(move |d| (2 * s as usize + d, s, self.forward(s, d))))
    }
}

/// The three disorder variants of the random transverse-field Ising model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum DisorderModel {
    /// Uniform field `h = exp(theta)` on every site, bonds uniform on (0, 1].
    FixedH { theta: f64 },
    /// Fields uniform on (0, exp(theta)], bonds uniform on (0, 1].
    BoxH { theta: f64 },
    /// Bonds present with probability `p` and infinitely strong; clusters
    /// are bond-percolation clusters.
    Diluted { p: f64 },
}

impl DisorderModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DisorderModel::FixedH { theta } | DisorderModel::BoxH { theta } => {
                if !theta.is_finite() {
                    return Err(Error::parameter(format!("theta must be finite, got {theta}")));
                }
                // exp(theta) must stay a positive normal number.
                if !(-700.0..=700.0).contains(&theta) {
                    return Err(Error::parameter(format!("theta {theta} is out of range")));
                }
            }
            DisorderModel::Diluted { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::parameter(format!("p must lie in [0, 1], got {p}")));
                }
            }
        }
        Ok(())
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            DisorderModel::FixedH { .. } => "fixed-h",
            DisorderModel::BoxH { .. } => "box-h",
            DisorderModel::Diluted { .. } => "diluted",
        }
    }

    /// `key=value` form of the active parameter.
    pub fn params(&self) -> String {
        match self {
            DisorderModel::FixedH { theta } | DisorderModel::BoxH { theta } => format!("theta={theta}"),
            DisorderModel::Diluted { p } => format!("p={p}"),
        }
    }

    /// Rebuilds a model from `variant_name()` and `params()` output.
    pub fn from_parts(variant: &str, params: &str) -> Result<Self> {
        let (key, value) = params
            .split_once('=')
            .ok_or_else(|| Error::parameter(format!("malformed model parameter {params:?}")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::parameter(format!("malformed model parameter {params:?}")))?;
        let model = match (variant, key) {
            ("fixed-h", "theta") => DisorderModel::FixedH { theta: value },
            ("box-h", "theta") => DisorderModel::BoxH { theta: value },
            ("diluted", "p") => DisorderModel::Diluted { p: value },
            _ => {
                return Err(Error::parameter(format!(
                    "unknown model {variant:?} with parameter {key:?}"
                )))
            }
        };
        model.validate()?;
        Ok(model)
    }
}

impl fmt::Display for DisorderModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.variant_name(), self.params())
    }
}

/// One sampled realization of bonds and fields.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderInstance {
    pub spec: LatticeSpec,
    pub model: DisorderModel,
    pub seed: u64,
    /// `J` per bond, indexed `2 * site + dir`. For the diluted model the
    /// value is a presence flag in {0, 1}.
    pub bonds: Vec<f64>,
    /// Transverse field per site.
    pub fields: Vec<f64>,
}

/// Draws a disorder realization; the result depends only on the arguments.
pub fn sample_disorder(spec: LatticeSpec, model: DisorderModel, seed: u64) -> Result<DisorderInstance> {
    model.validate()?;
    let mut rng = rng::stream(seed);
    let n = spec.sites();
    let (bonds, fields) = match model {
        DisorderModel::FixedH { theta } => {
            let bonds = (0..2 * n).map(|_| unit_open_closed(&mut rng)).collect();
            (bonds, vec![theta.exp(); n])
        }
        DisorderModel::BoxH { theta } => {
            let bonds: Vec<f64> = (0..2 * n).map(|_| unit_open_closed(&mut rng)).collect();
            let h = theta.exp();
            let fields = (0..n).map(|_| h * unit_open_closed(&mut rng)).collect();
            (bonds, fields)
        }
        DisorderModel::Diluted { p } => {
            use rand::Rng;
            let bonds = (0..2 * n)
                .map(|_| if rng.gen::<f64>() < p { 1.0 } else { 0.0 })
                .collect();
            (bonds, vec![1.0; n])
        }
    };
    Ok(DisorderInstance {
        spec,
        model,
        seed,
        bonds,
        fields,
    })
}

impl DisorderInstance {
    pub fn present_bonds(&self) -> usize {
        self.bonds.iter().filter(|&&j| j > 0.0).count()
    }

    /// Writes the debug text form: a header `L seed variant params`, then
    /// `x y h` per site and `x y dir J` per bond.
    pub fn write(&self, path: &Path) -> Result<()> {
        textio::write_file(path, |w| self.write_to(w))
    }

    pub fn write_to(&self, w: &mut dyn Write) -> std::io::Result<()> {
        let spec = self.spec;
        writeln!(w, "{} {} {}", spec.size(), self.seed, self.model)?;
        for s in 0..spec.sites() as u32 {
            let (x, y) = spec.coords(s);
            writeln!(w, "{x} {y} {}", self.fields[s as usize])?;
        }
        for s in 0..spec.sites() as u32 {
            let (x, y) = spec.coords(s);
            for d in 0..2 {
                writeln!(w, "{x} {y} {d} {}", self.bonds[2 * s as usize + d])?;
            }
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
        let seed: u64 = lines.parse(ln, seed)?;
        let model = DisorderModel::from_parts(variant, params)?;
        let n = spec.sites();
        let mut fields = vec![f64::NAN; n];
        for _ in 0..n {
            let (ln, l) = lines.expect_line("site line")?;
            let [x, y, h] = lines.tokens(ln, l)?;
            let site = site_at(&lines, &spec, ln, x, y)?;
            fields[site as usize] = lines.parse(ln, h)?;
        }
        let mut bonds = vec![f64::NAN; 2 * n];
        for _ in 0..2 * n {
            let (ln, l) = lines.expect_line("bond line")?;
            let [x, y, d, j] = lines.tokens(ln, l)?;
            let site = site_at(&lines, &spec, ln, x, y)?;
            let d: usize = lines.parse(ln, d)?;
            if d > 1 {
                return Err(lines.error(ln, "bond direction must be 0 or 1"));
            }
            bonds[2 * site as usize + d] = lines.parse(ln, j)?;
        }
        if let Some((ln, _)) = lines.next_line() {
            return Err(lines.error(ln, "trailing content"));
        }
        if fields.iter().chain(&bonds).any(|v| v.is_nan()) {
            return Err(Error::parse(name, 0, "missing site or bond entries"));
        }
        Ok(Self {
            spec,
            model,
            seed,
            bonds,
            fields,
        })
    }
}

fn site_at(lines: &Lines<'_>, spec: &LatticeSpec, ln: usize, x: &str, y: &str) -> Result<u32> {
    let (x, y): (u32, u32) = (lines.parse(ln, x)?, lines.parse(ln, y)?);
    if x >= spec.size() || y >= spec.size() {
        return Err(lines.error(ln, format!("site ({x}, {y}) outside the lattice")));
    }
    Ok(spec.index(x, y))
}

/// Ground-state clusters of the diluted model: connected components of the
/// present bonds.
pub fn percolation_clusters(instance: &DisorderInstance) -> Result<ClusterDecomposition> {
    if !matches!(instance.model, DisorderModel::Diluted { .. }) {
        return Err(Error::Variant(format!(
            "percolation labeling needs the diluted model, got {}",
            instance.model.variant_name()
        )));
    }
    let spec = instance.spec;
    let mut uf = UnionFind::new(spec.sites());
    for (b, s, t) in spec.bond_endpoints() {
        if instance.bonds[b] > 0.0 {
            uf.union(s, t);
        }
    }
    Ok(ClusterDecomposition::from_roots(
        spec,
        instance.seed,
        instance.model,
        &uf.roots(),
    ))
}
