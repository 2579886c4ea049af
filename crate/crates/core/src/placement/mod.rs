//! Node regions: discretized disks packed onto the lattice.
//!
//! Heterogeneous layouts draw radii from a truncated power law and grow an
//! outward spiral of mutually tangent disks around the lattice centre until a
//! target fraction of the sites is covered. The grid-like benchmark places
//! equal disks on a triangular lattice with the same coverage.

mod grid;

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::rng::{self, unit_open_closed};
use crate::textio::{self, Lines};
use grid::SpatialGrid;

/// Site carries no node.
pub const NO_NODE: u32 = u32::MAX;

/// Surface-to-surface gap between tangent disks, in lattice units. Small
/// enough that tangent regions still have lattice-adjacent boundary sites.
pub const GAP: f64 = 0.01;
/// Consecutive unplaceable radii before the spiral packing gives up.
pub const FAILURE_BUDGET: usize = 1000;
/// Angular resolution of the tangent-position scan.
const ANGLE_STEPS: usize = 360;
const TANGENCY_SLACK: f64 = 1e-6;

/// A disk on the torus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

/// How a layout was produced.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "packing", rename_all = "kebab-case")]
pub enum Packing {
    Spiral { gamma: f64, r_min: f64, r_max: f64 },
    Hexagonal { pitch: f64, radius: f64 },
    HexagonalPatch { pitch: f64, radius: f64 },
}

/// Packed node regions and the site-to-node map.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeLayout {
    pub spec: LatticeSpec,
    pub seed: u64,
    pub packing: Packing,
    pub coverage_target: f64,
    pub disks: Vec<Disk>,
    /// Node id per site, [`NO_NODE`] where uncovered.
    pub site_to_node: Vec<u32>,
    pub coverage: f64,
    /// The spiral ran out of failure budget before reaching the target.
    pub incomplete: bool,
}

impl NodeLayout {
    pub fn node_count(&self) -> usize {
        self.disks.len()
    }

    pub fn covered_sites(&self) -> usize {
        self.site_to_node.iter().filter(|&&n| n != NO_NODE).count()
    }

    /// Sites of every node region.
    pub fn regions(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.disks.len()];
        for (s, &n) in self.site_to_node.iter().enumerate() {
            if n != NO_NODE {
                out[n as usize].push(s as u32);
            }
        }
        out
    }

    /// Text form: header `L seed gamma r_min r_max coverage`, one `id cx cy r`
    /// line per disk, then a `sites` marker line followed by `x y node` for
    /// every covered site. Hexagonal layouts write `hexagonal/<pitch>` (or
    /// `hexagonal-patch/<pitch>`) in the gamma slot and the common radius as
    /// both `r_min` and `r_max`.
    pub fn write(&self, path: &Path) -> Result<()> {
        textio::write_file(path, |w| self.write_to(w))
    }

    pub fn write_to(&self, w: &mut dyn Write) -> std::io::Result<()> {
        let (g, lo, hi) = match self.packing {
            Packing::Spiral { gamma, r_min, r_max } => (gamma.to_string(), r_min, r_max),
            Packing::Hexagonal { pitch, radius } => (format!("hexagonal/{pitch}"), radius, radius),
            Packing::HexagonalPatch { pitch, radius } => (format!("hexagonal-patch/{pitch}"), radius, radius),
        };
        writeln!(
            w,
            "{} {} {g} {lo} {hi} {}",
            self.spec.size(),
            self.seed,
            self.coverage_target
        )?;
        for (id, d) in self.disks.iter().enumerate() {
            writeln!(w, "{id} {} {} {}", d.x, d.y, d.radius)?;
        }
        writeln!(w, "sites {}", if self.incomplete { "incomplete" } else { "complete" })?;
        for (s, &n) in self.site_to_node.iter().enumerate() {
            if n != NO_NODE {
                let (x, y) = self.spec.coords(s as u32);
                writeln!(w, "{x} {y} {n}")?;
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
        let [size, seed, g, lo, hi, cov] = lines.tokens(ln, header)?;
        let spec = LatticeSpec::new(lines.parse(ln, size)?)?;
        let seed = lines.parse(ln, seed)?;
        let (r_lo, r_hi): (f64, f64) = (lines.parse(ln, lo)?, lines.parse(ln, hi)?);
        let packing = if let Some(pitch) = g.strip_prefix("hexagonal/") {
            Packing::Hexagonal {
                pitch: lines.parse(ln, pitch)?,
                radius: r_lo,
            }
        } else if let Some(pitch) = g.strip_prefix("hexagonal-patch/") {
            Packing::HexagonalPatch {
                pitch: lines.parse(ln, pitch)?,
                radius: r_lo,
            }
        } else {
            Packing::Spiral {
                gamma: lines.parse(ln, g)?,
                r_min: r_lo,
                r_max: r_hi,
            }
        };
        let coverage_target = lines.parse(ln, cov)?;
        let mut disks = Vec::new();
        let incomplete = loop {
            let (ln, l) = lines.expect_line("disk or sites line")?;
            if let Some(rest) = l.strip_prefix("sites") {
                match rest.trim() {
                    "complete" => break false,
                    "incomplete" => break true,
                    other => return Err(lines.error(ln, format!("unknown layout status {other:?}"))),
                }
            }
            let [id, x, y, r] = lines.tokens(ln, l)?;
            if lines.parse::<usize>(ln, id)? != disks.len() {
                return Err(lines.error(ln, "disk ids must be consecutive from 0"));
            }
            disks.push(Disk {
                x: lines.parse(ln, x)?,
                y: lines.parse(ln, y)?,
                radius: lines.parse(ln, r)?,
            });
        };
        let mut site_to_node = vec![NO_NODE; spec.sites()];
        while let Some((ln, l)) = lines.next_line() {
            let [x, y, n] = lines.tokens(ln, l)?;
            let (x, y, n): (u32, u32, u32) = (lines.parse(ln, x)?, lines.parse(ln, y)?, lines.parse(ln, n)?);
            if x >= spec.size() || y >= spec.size() || n as usize >= disks.len() {
                return Err(lines.error(ln, "site or node out of range"));
            }
            let slot = &mut site_to_node[spec.index(x, y) as usize];
            if *slot != NO_NODE {
                return Err(lines.error(ln, "site assigned to two nodes"));
            }
            *slot = n;
        }
        let covered = site_to_node.iter().filter(|&&n| n != NO_NODE).count();
        Ok(Self {
            spec,
            seed,
            packing,
            coverage_target,
            disks,
            site_to_node,
            coverage: covered as f64 / spec.sites() as f64,
            incomplete,
        })
    }
}

/// Inverse CDF of the power law `p(r) ~ r^-gamma` on `[r_min, inf)`, `u` in (0, 1].
pub fn radius_from_uniform(u: f64, gamma: f64, r_min: f64) -> f64 {
    r_min * u.powf(-1.0 / (gamma - 1.0))
}

/// CDF of the power law truncated to `[r_min, r_max]`.
pub fn truncated_power_law_cdf(r: f64, gamma: f64, r_min: f64, r_max: f64) -> f64 {
    if r <= r_min {
        return 0.0;
    }
    if r >= r_max {
        return 1.0;
    }
    let a = 1.0 - gamma;
    (1.0 - (r / r_min).powf(a)) / (1.0 - (r_max / r_min).powf(a))
}

fn check_radius_law(gamma: f64, r_min: f64, r_max: f64) -> Result<()> {
    if !(gamma > 1.0 && gamma.is_finite()) {
        return Err(Error::parameter(format!("radius exponent must exceed 1, got {gamma}")));
    }
    if !(r_min >= 2.0 && r_max > r_min && r_max.is_finite()) {
        return Err(Error::parameter(format!(
            "radius bounds must satisfy 2 <= r_min < r_max, got [{r_min}, {r_max}]"
        )));
    }
    Ok(())
}

/// Draws a radius from the power law truncated to `[r_min, r_max]` by rejection.
pub fn sample_radius<R: Rng + ?Sized>(rng: &mut R, gamma: f64, r_min: f64, r_max: f64) -> Result<f64> {
    check_radius_law(gamma, r_min, r_max)?;
    loop {
        let r = radius_from_uniform(unit_open_closed(rng), gamma, r_min);
        if r <= r_max {
            return Ok(r);
        }
    }
}

fn torus_delta(a: f64, b: f64, size: f64) -> f64 {
    let d = (a - b).rem_euclid(size);
    d.min(size - d)
}

fn torus_dist(ax: f64, ay: f64, bx: f64, by: f64, size: f64) -> f64 {
    torus_delta(ax, bx, size).hypot(torus_delta(ay, by, size))
}

/// Sites within torus distance `radius` of the disk centre, ascending.
pub fn discretize_disk(disk: &Disk, spec: LatticeSpec) -> Vec<u32> {
    discretize(disk.x, disk.y, disk.radius, spec)
}

fn discretize(cx: f64, cy: f64, radius: f64, spec: LatticeSpec) -> Vec<u32> {
    let l = spec.size() as i64;
    let size = l as f64;
    let mut out = Vec::new();
    if radius < 0.0 {
        return out;
    }
    if 2.0 * radius + 2.0 >= size {
        for s in 0..spec.sites() as u32 {
            let (x, y) = spec.coords(s);
            if torus_dist(x as f64, y as f64, cx, cy, size) <= radius {
                out.push(s);
            }
        }
        return out;
    }
    let r2 = radius * radius;
    for iy in (cy - radius).ceil() as i64..=(cy + radius).floor() as i64 {
        let dy = iy as f64 - cy;
        for ix in (cx - radius).ceil() as i64..=(cx + radius).floor() as i64 {
            let dx = ix as f64 - cx;
            if dx * dx + dy * dy <= r2 {
                out.push(spec.index(ix.rem_euclid(l) as u32, iy.rem_euclid(l) as u32));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Incremental layout construction shared by both packings.
struct Builder {
    spec: LatticeSpec,
    disks: Vec<Disk>,
    site_to_node: Vec<u32>,
    covered: usize,
}

impl Builder {
    fn new(spec: LatticeSpec) -> Self {
        Self {
            spec,
            disks: Vec::new(),
            site_to_node: vec![NO_NODE; spec.sites()],
            covered: 0,
        }
    }

    /// Adds a disk whose region is discretized with `region_radius`.
    fn add(&mut self, disk: Disk, region_radius: f64) -> Result<()> {
        let id = self.disks.len() as u32;
        let sites = discretize(disk.x, disk.y, region_radius, self.spec);
        if sites.is_empty() {
            return Err(Error::contract("node region is empty"));
        }
        for &s in &sites {
            let slot = &mut self.site_to_node[s as usize];
            if *slot != NO_NODE {
                return Err(Error::contract(format!("node regions {} and {id} overlap", *slot)));
            }
            *slot = id;
        }
        self.covered += sites.len();
        self.disks.push(disk);
        Ok(())
    }

    fn coverage(&self) -> f64 {
        self.covered as f64 / self.spec.sites() as f64
    }
}

/// Candidate tangent position found during the scan.
#[derive(Clone, Copy)]
struct Candidate {
    dist: f64,
    angle: usize,
    anchor: usize,
    x: f64,
    y: f64,
}

impl Candidate {
    fn key(&self) -> (f64, usize, usize) {
        (self.dist, self.angle, self.anchor)
    }
}

/// Outward-spiral packing of power-law disks around the lattice centre.
///
/// Disks are separated by [`GAP`] and their regions are discretized with
/// radius `r - GAP / 2`, so regions never share a site.
pub fn pack_spiral(
    spec: LatticeSpec,
    seed: u64,
    gamma: f64,
    r_min: f64,
    r_max: f64,
    coverage_target: f64,
) -> Result<NodeLayout> {
    check_radius_law(gamma, r_min, r_max)?;
    if !(coverage_target > 0.0 && coverage_target < PI / (2.0 * 3f64.sqrt())) {
        return Err(Error::parameter(format!(
            "coverage target must lie in (0, hexagonal packing density), got {coverage_target}"
        )));
    }
    let size = spec.size() as f64;
    if r_max + GAP >= size / 4.0 {
        return Err(Error::parameter(format!(
            "r_max = {r_max} is too large for a lattice of size {}",
            spec.size()
        )));
    }
    let mut rng = rng::stream(seed);
    let (cx, cy) = (size / 2.0, size / 2.0);
    let mut builder = Builder::new(spec);
    let mut grid = SpatialGrid::new(size, 2.0 * r_min + GAP);
    // smallest radius known not to fit anywhere around each disk; a larger
    // disk touching the same point contains the smaller one, so it cannot
    // fit either
    let mut closed_for: Vec<f64> = Vec::new();

    let first = sample_radius(&mut rng, gamma, r_min, r_max)?;
    builder.add(
        Disk {
            x: cx,
            y: cy,
            radius: first,
        },
        first - GAP / 2.0,
    )?;
    grid.insert(0, cx, cy, first);
    closed_for.push(f64::INFINITY);

    let angles: Vec<(f64, f64)> = (0..ANGLE_STEPS)
        .map(|a| {
            let t = (a as f64) * 2.0 * PI / ANGLE_STEPS as f64;
            (t.cos(), t.sin())
        })
        .collect();

    let mut failures = 0;
    let mut incomplete = false;
    let mut order: Vec<(f64, usize)> = Vec::new();
    while builder.coverage() < coverage_target {
        let r = sample_radius(&mut rng, gamma, r_min, r_max)?;
        order.clear();
        order.extend(
            builder
                .disks
                .iter()
                .enumerate()
                .filter(|(i, _)| r < closed_for[*i])
                .map(|(i, d)| {
                    let reach = d.radius + r + GAP;
                    ((torus_dist(d.x, d.y, cx, cy, size) - reach).max(0.0), i)
                }),
        );
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut best: Option<Candidate> = None;
        for &(lower_bound, anchor) in &order {
            if best.is_some_and(|b| lower_bound > b.dist) {
                break;
            }
            let d = builder.disks[anchor];
            let reach = d.radius + r + GAP;
            let mut any = false;
            for (angle, &(c, s)) in angles.iter().enumerate() {
                let x = (d.x + reach * c).rem_euclid(size);
                let y = (d.y + reach * s).rem_euclid(size);
                let disks = &builder.disks;
                let feasible = grid.all_near(x, y, r + GAP, |id| {
                    let o = disks[id as usize];
                    torus_dist(x, y, o.x, o.y, size) >= o.radius + r + GAP - TANGENCY_SLACK
                });
                if !feasible {
                    continue;
                }
                any = true;
                let cand = Candidate {
                    dist: torus_dist(x, y, cx, cy, size),
                    angle,
                    anchor,
                    x,
                    y,
                };
                if best.map_or(true, |b| cand.key() < b.key()) {
                    best = Some(cand);
                }
            }
            if !any {
                closed_for[anchor] = closed_for[anchor].min(r);
            }
        }

        match best {
            Some(c) => {
                failures = 0;
                let id = builder.disks.len() as u32;
                builder.add(
                    Disk {
                        x: c.x,
                        y: c.y,
                        radius: r,
                    },
                    r - GAP / 2.0,
                )?;
                grid.insert(id, c.x, c.y, r);
                closed_for.push(f64::INFINITY);
            }
            None => {
                failures += 1;
                if failures >= FAILURE_BUDGET {
                    incomplete = true;
                    break;
                }
            }
        }
    }
    let coverage = builder.coverage();
    Ok(NodeLayout {
        spec,
        seed,
        packing: Packing::Spiral { gamma, r_min, r_max },
        coverage_target,
        disks: builder.disks,
        site_to_node: builder.site_to_node,
        coverage,
        incomplete,
    })
}

/// Disk radius giving `coverage` on a triangular lattice of the given pitch.
pub fn hexagonal_radius(pitch: f64, coverage: f64) -> f64 {
    pitch * (coverage * 3f64.sqrt() / (2.0 * PI)).sqrt()
}

/// Pitch of a triangular lattice with `nodes` sites on an `L x L` torus.
pub fn hexagonal_pitch_for_nodes(spec: LatticeSpec, nodes: usize) -> f64 {
    let area = (spec.size() as f64).powi(2);
    (2.0 * area / (nodes.max(1) as f64 * 3f64.sqrt())).sqrt()
}

/// Equal disks on a triangular lattice wrapped onto the torus.
///
/// The pitch is adjusted so that a whole number of columns and an even
/// number of rows fit; the radius is chosen from the adjusted cell area so
/// the covered fraction matches `coverage_target`.
pub fn pack_hexagonal(spec: LatticeSpec, coverage_target: f64, pitch: f64) -> Result<NodeLayout> {
    if !(coverage_target > 0.0 && coverage_target < 1.0) {
        return Err(Error::parameter(format!(
            "coverage must lie in (0, 1), got {coverage_target}"
        )));
    }
    if !(pitch > 0.0 && pitch.is_finite()) {
        return Err(Error::parameter(format!("pitch must be positive, got {pitch}")));
    }
    let size = spec.size() as f64;
    let row = pitch * 3f64.sqrt() / 2.0;
    let cols = ((size / pitch).round() as usize).max(1);
    let rows = (((size / row) / 2.0).round() as usize).max(1) * 2;
    let (px, py) = (size / cols as f64, size / rows as f64);
    let skew = (py / px) / (3f64.sqrt() / 2.0) - 1.0;
    if ((px - pitch) / pitch).abs() > 0.05 || skew.abs() > 0.05 {
        log::warn!("hexagonal pitch {pitch} adjusted to {px:.4} x {py:.4} ({cols} x {rows} nodes) to fit the torus");
    }
    let radius = (coverage_target * px * py / PI).sqrt();
    if radius < 2.0 {
        return Err(Error::parameter(format!(
            "hexagonal node radius {radius:.3} is below the minimum of 2"
        )));
    }
    let nearest = px.min((px * px / 4.0 + py * py).sqrt());
    if nearest <= 2.0 * radius {
        return Err(Error::parameter(format!(
            "pitch {px:.3} too small for radius {radius:.3}: disks would overlap"
        )));
    }
    let mut builder = Builder::new(spec);
    for j in 0..rows {
        let shift = if j % 2 == 1 { 0.5 } else { 0.0 };
        for i in 0..cols {
            let disk = Disk {
                x: ((i as f64 + 0.25 + shift) * px).rem_euclid(size),
                y: ((j as f64 + 0.5) * py).rem_euclid(size),
                radius,
            };
            builder.add(disk, radius)?;
        }
    }
    let coverage = builder.coverage();
    Ok(NodeLayout {
        spec,
        seed: 0,
        packing: Packing::Hexagonal { pitch: px, radius },
        coverage_target,
        disks: builder.disks,
        site_to_node: builder.site_to_node,
        coverage,
        incomplete: false,
    })
}

/// Radius of equal disks that reach `coverage` with `nodes` disks.
pub fn patch_radius_for_nodes(spec: LatticeSpec, coverage: f64, nodes: usize) -> f64 {
    let area = (spec.size() as f64).powi(2);
    (coverage * area / (PI * nodes.max(1) as f64)).sqrt()
}

/// Equal disks in a finite hexagonal patch around the lattice centre.
///
/// Disks of radius `radius` sit on a triangular lattice of pitch
/// `2 radius + GAP`, so neighbours are tangent up to the same gap as in the
/// spiral packing, and regions are discretized with `radius - GAP / 2`.
/// Positions are taken nearest to the centre first until the coverage
/// target is met; only positions whose disk fits inside the inscribed circle
/// of the torus are used, which keeps the patch from meeting itself across
/// the periodic boundary.
pub fn pack_hexagonal_patch(spec: LatticeSpec, coverage_target: f64, radius: f64) -> Result<NodeLayout> {
    if !(coverage_target > 0.0 && coverage_target < 1.0) {
        return Err(Error::parameter(format!(
            "coverage must lie in (0, 1), got {coverage_target}"
        )));
    }
    if !(radius >= 2.0 && radius.is_finite()) {
        return Err(Error::parameter(format!(
            "patch node radius must be at least 2, got {radius}"
        )));
    }
    let size = spec.size() as f64;
    let (cx, cy) = (size / 2.0, size / 2.0);
    let pitch = 2.0 * radius + GAP;
    let row = pitch * 3f64.sqrt() / 2.0;
    let reach = size / 2.0 - radius - GAP;
    if reach < 0.0 {
        return Err(Error::parameter(format!(
            "radius {radius} too large for L = {}",
            spec.size()
        )));
    }
    let span = (reach / row).ceil() as i64 + 1;
    let mut sites: Vec<(f64, i64, i64, f64, f64)> = Vec::new();
    for j in -span..=span {
        for i in -2 * span..=2 * span {
            let (dx, dy) = ((i as f64 + j as f64 / 2.0) * pitch, j as f64 * row);
            let d = dx.hypot(dy);
            if d <= reach {
                sites.push((d, j, i, cx + dx, cy + dy));
            }
        }
    }
    sites.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut builder = Builder::new(spec);
    for &(_, _, _, x, y) in &sites {
        if builder.coverage() >= coverage_target {
            break;
        }
        builder.add(Disk { x, y, radius }, radius - GAP / 2.0)?;
    }
    let coverage = builder.coverage();
    let incomplete = coverage < coverage_target;
    Ok(NodeLayout {
        spec,
        seed: 0,
        packing: Packing::HexagonalPatch { pitch, radius },
        coverage_target,
        disks: builder.disks,
        site_to_node: builder.site_to_node,
        coverage,
        incomplete,
    })
}
