//! End-to-end acceptance run: ten criteria, one PASS/FAIL line each.
//!
//! The ensembles are large; expect this target to take twenty to thirty
//! minutes on a single core.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinweb::experiment::{pack_layout, run_ensemble, sweep_parameter, Depth, EnsembleSummary, ExperimentConfig};
use spinweb::placement::NodeLayout;
use spinweb::sdrg::{exact, RgState};
use spinweb::topology::{assortativity, average_shortest_path, global_clustering, ExponentReport, Graph, PathMode};
use spinweb::{
    build_network, entanglement_entropy, percolation_clusters, run_sdrg, sample_disorder, ClusterDecomposition,
    DisorderInstance, DisorderModel, LatticeSpec, LinkRule, THETA_C,
};
use walkdir::WalkDir;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Writes straight to the process stderr so the lines survive output capture.
fn say(line: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}

// ---- criterion 1 -----------------------------------------------------------

fn rule_fidelity() -> Verdict {
    const TRIALS: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_bond = 0.0f64;
    for _ in 0..TRIALS {
        let h1 = rng.gen_range(0.05..1.0);
        let h2 = rng.gen_range(0.05..1.0);
        let j = f64::max(h1, h2) * rng.gen_range(100.0..1000.0);
        let mut state = RgState::new(&[h1, h2], &[(0, 1, j)]).unwrap();
        let merged = state.decimate_bond(0, 1);
        let rule = 2.0 * state.field(merged);
        assert!((rule - 2.0 * h1 * h2 / j).abs() <= 1e-12 * rule);
        let split = exact::two_site_splitting(j, h1, h2);
        worst_bond = worst_bond.max((split - rule).abs() / split);
    }
    let mut worst_site = 0.0f64;
    for _ in 0..TRIALS {
        let h = rng.gen_range(0.1..1.0);
        let jl = h * rng.gen_range(1e-3..1e-2);
        let jr = h * rng.gen_range(1e-3..1e-2);
        let mut state = RgState::new(&[h * 1e-3, h, h * 1e-3], &[(0, 1, jl), (1, 2, jr)])
            .unwrap()
            .with_prune_margin(None);
        state.decimate_site(1);
        let rule = state.bond(0, 2).unwrap();
        assert!((rule - jl * jr / h).abs() <= 1e-12 * rule);
        let inferred = exact::chain_effective_bond(jl, h, jr);
        worst_site = worst_site.max((inferred - rule).abs() / inferred);
    }
    verdict(
        worst_bond < 0.01 && worst_site < 0.02,
        format!(
            "{TRIALS} trials each; worst doublet deviation {:.3}% (limit 1%), worst chain bond deviation {:.3}% (limit 2%)",
            100.0 * worst_bond,
            100.0 * worst_site
        ),
    )
}

// ---- criterion 2 -----------------------------------------------------------

/// Partition as a canonical relabelling: first appearance in site order.
fn canonical(labels: impl IntoIterator<Item = u32>) -> Vec<u32> {
    let mut ids = HashMap::new();
    labels
        .into_iter()
        .map(|l| {
            let next = ids.len() as u32;
            *ids.entry(l).or_insert(next)
        })
        .collect()
}

fn flood_fill(instance: &DisorderInstance) -> Vec<u32> {
    let n = instance.spec.sites();
    let mut adj = vec![Vec::new(); n];
    for (b, u, v) in instance.spec.bond_endpoints() {
        if instance.bonds[b] > 0.0 {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
    }
    let mut label = vec![u32::MAX; n];
    for start in 0..n {
        if label[start] != u32::MAX {
            continue;
        }
        label[start] = start as u32;
        let mut queue = VecDeque::from([start as u32]);
        while let Some(s) = queue.pop_front() {
            for &t in &adj[s as usize] {
                if label[t as usize] == u32::MAX {
                    label[t as usize] = start as u32;
                    queue.push_back(t);
                }
            }
        }
    }
    label
}

fn reference_network(decomp: &ClusterDecomposition, layout: &NodeLayout, rule: LinkRule) -> Vec<(u32, u32, u32)> {
    let mut owner = HashMap::new();
    for (node, region) in layout.regions().iter().enumerate() {
        for &s in region {
            owner.insert(s, node as u32);
        }
    }
    let clusters = decomp.members();
    let nodes = layout.node_count() as u32;
    let mut edges = Vec::new();
    for a in 0..nodes {
        for b in a + 1..nodes {
            let count = clusters
                .iter()
                .filter(|sites| {
                    let touched: HashSet<u32> = sites.iter().filter_map(|s| owner.get(s).copied()).collect();
                    let outside = sites.iter().any(|s| !owner.contains_key(s));
                    touched == HashSet::from([a, b]) && !(rule == LinkRule::PairContained && outside)
                })
                .count() as u32;
            if count > 0 {
                edges.push((a, b, count));
            }
        }
    }
    edges
}

fn double_scan(decomp: &ClusterDecomposition, region: &HashSet<u32>) -> usize {
    decomp
        .members()
        .iter()
        .filter(|sites| sites.iter().any(|s| region.contains(s)) && sites.iter().any(|s| !region.contains(s)))
        .count()
}

fn random_region(rng: &mut ChaCha8Rng, spec: LatticeSpec) -> Vec<u32> {
    let l = spec.size();
    if rng.gen_bool(0.5) {
        let (x0, y0) = (rng.gen_range(0..l), rng.gen_range(0..l));
        let (w, h) = (rng.gen_range(1..=l), rng.gen_range(1..=l));
        (0..w)
            .flat_map(|dx| (0..h).map(move |dy| ((x0 + dx) % l, (y0 + dy) % l)))
            .map(|(x, y)| spec.index(x, y))
            .collect()
    } else {
        let count = rng.gen_range(1..spec.sites());
        (0..count).map(|_| rng.gen_range(0..spec.sites() as u32)).collect()
    }
}

fn oracle_equivalence() -> Verdict {
    const SEEDS: u64 = 20;
    const REGIONS_PER_SEED: usize = 6;
    let spec = LatticeSpec::new(32).unwrap();
    let mut config = ExperimentConfig::default();
    config.lattice_size = 32;
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let (mut labels_ok, mut networks_ok, mut entropy_ok) = (0, 0, 0);
    let (mut networks, mut regions, mut links) = (0, 0, 0);
    for seed in 0..SEEDS {
        let diluted = sample_disorder(
            spec,
            DisorderModel::Diluted {
                p: 0.3 + 0.02 * seed as f64,
            },
            seed,
        )
        .unwrap();
        let perc = percolation_clusters(&diluted).unwrap();
        if canonical(perc.labels().iter().copied()) == canonical(flood_fill(&diluted)) {
            labels_ok += 1;
        }
        let critical = sample_disorder(spec, DisorderModel::FixedH { theta: THETA_C }, seed).unwrap();
        let sdrg = run_sdrg(&critical).unwrap();
        let layout = pack_layout(&config, seed).unwrap();
        for decomp in [&perc, &sdrg] {
            for rule in [LinkRule::NodeExclusive, LinkRule::PairContained] {
                let net = build_network(decomp, &layout, rule).unwrap();
                networks += 1;
                links += net.edge_count();
                if net.edges() == reference_network(decomp, &layout, rule).as_slice() {
                    networks_ok += 1;
                }
            }
            for _ in 0..REGIONS_PER_SEED {
                let region = random_region(&mut rng, spec);
                regions += 1;
                if entanglement_entropy(decomp, &region) == double_scan(decomp, &region.iter().copied().collect()) {
                    entropy_ok += 1;
                }
            }
        }
    }
    verdict(
        labels_ok == SEEDS && networks_ok == networks && entropy_ok == regions,
        format!(
            "labels {labels_ok}/{SEEDS}, networks {networks_ok}/{networks} ({links} links), entropies {entropy_ok}/{regions}"
        ),
    )
}

// ---- criterion 3 -----------------------------------------------------------

fn analytic_fixtures() -> Verdict {
    let close = |a: Option<f64>, b: f64| a.is_some_and(|a| (a - b).abs() <= 1e-12);
    let mean_path = |g: &Graph| average_shortest_path(g, PathMode::Exact).unwrap().mean;
    let triangle = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]);
    let path = Graph::from_edges(3, [(0, 1), (1, 2)]);
    let cycle = Graph::from_edges(5, (0..5).map(|i| (i, (i + 1) % 5)));
    let star = Graph::from_edges(5, (1..5).map(|i| (0, i)));
    let lattice = Graph::triangular_lattice(8);
    let checks = [
        ("triangle <d> = 1", close(mean_path(&triangle), 1.0)),
        ("triangle C = 1", close(global_clustering(&triangle), 1.0)),
        ("3-path <d> = 4/3", close(mean_path(&path), 4.0 / 3.0)),
        ("5-cycle <d> = 1.5", close(mean_path(&cycle), 1.5)),
        ("star r = -1", close(assortativity(&star), -1.0)),
        ("star C = 0", close(global_clustering(&star), 0.0)),
        ("triangular lattice C = 0.4", close(global_clustering(&lattice), 0.4)),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    verdict(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} fixtures exact to 1e-12", checks.len())
        } else {
            format!("failed: {}", failed.join(", "))
        },
    )
}

// ---- criteria 4 to 7 -------------------------------------------------------

const SIZES: [u32; 4] = [128, 256, 512, 1024];
const ENSEMBLE: usize = 16;

struct Scaling {
    spiral: Vec<EnsembleSummary>,
    patch: Vec<EnsembleSummary>,
}

fn ensembles() -> Scaling {
    let run = |l: u32, packing: &str| {
        let mut config = ExperimentConfig::default();
        config.lattice_size = l;
        config.samples = ENSEMBLE;
        config.seed = 2024;
        config.set("packing", packing).unwrap();
        let started = Instant::now();
        let summary = run_ensemble(&config).unwrap().summary;
        say(&format!(
            "  L={l:<5} {packing:<15} N={:>8.1} links={:>8.1} <d>={:>6.2} r={:>7.3} C={:.3} \
             C_local slope={:>6.3} gamma={:>5.2} ({:.0?})",
            summary.lcc_nodes.mean.unwrap_or(f64::NAN),
            summary.lcc_links.mean.unwrap_or(f64::NAN),
            summary.path_length.and_then(|e| e.mean).unwrap_or(f64::NAN),
            summary.assortativity.and_then(|e| e.mean).unwrap_or(f64::NAN),
            summary.clustering.and_then(|e| e.mean).unwrap_or(f64::NAN),
            summary.pooled_local_clustering_slope.unwrap_or(f64::NAN),
            summary
                .pooled_degree_exponent
                .as_ref()
                .and_then(ExponentReport::gamma)
                .unwrap_or(f64::NAN),
            started.elapsed()
        ));
        summary
    };
    let mut scaling = Scaling {
        spiral: Vec::new(),
        patch: Vec::new(),
    };
    for l in SIZES {
        scaling.spiral.push(run(l, "spiral"));
        scaling.patch.push(run(l, "hexagonal-patch"));
    }
    scaling
}

fn degree_exponent(s: &Scaling) -> Verdict {
    let largest = s.spiral.last().unwrap();
    let per_sample = largest.degree_exponent.and_then(|e| e.mean);
    match &largest.pooled_degree_exponent {
        Some(ExponentReport::Fitted {
            gamma,
            error,
            k_min,
            tail,
            ..
        }) => verdict(
            (gamma - 2.67).abs() <= 0.4,
            format!(
                "L=1024, {ENSEMBLE} networks: averaged-distribution gamma {gamma:.3} +- {error:.3} \
                 (k_min {k_min}, tail {tail}); per-network mean {:.3}; target 2.67 +- 0.4",
                per_sample.unwrap_or(f64::NAN)
            ),
        ),
        other => verdict(false, format!("no fit: {other:?}")),
    }
}

/// Coefficient of determination of a least-squares line.
fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

/// (R² against ln N, R² against sqrt N).
fn growth_fits(summaries: &[EnsembleSummary]) -> (f64, f64) {
    let n: Vec<f64> = summaries.iter().map(|s| s.lcc_nodes.mean.unwrap()).collect();
    let d: Vec<f64> = summaries.iter().map(|s| s.path_length.unwrap().mean.unwrap()).collect();
    let ln: Vec<f64> = n.iter().map(|v| v.ln()).collect();
    let sqrt: Vec<f64> = n.iter().map(|v| v.sqrt()).collect();
    (r_squared(&ln, &d), r_squared(&sqrt, &d))
}

fn small_world(s: &Scaling) -> Verdict {
    let (spiral_ln, spiral_sqrt) = growth_fits(&s.spiral);
    let (patch_ln, patch_sqrt) = growth_fits(&s.patch);
    verdict(
        spiral_ln > spiral_sqrt && patch_sqrt > patch_ln,
        format!(
            "heterogeneous R2 ln N {spiral_ln:.4} vs sqrt N {spiral_sqrt:.4}; \
             hexagonal R2 ln N {patch_ln:.4} vs sqrt N {patch_sqrt:.4}"
        ),
    )
}

fn disassortativity(s: &Scaling) -> Verdict {
    let r = |e: &EnsembleSummary| e.assortativity.and_then(|a| a.mean).unwrap_or(f64::NAN);
    let spiral: Vec<(u32, f64)> = SIZES
        .iter()
        .copied()
        .zip(s.spiral.iter().map(r))
        .filter(|p| p.0 >= 256)
        .collect();
    let hex = r(s.patch.last().unwrap());
    let shown: Vec<String> = spiral.iter().map(|(l, v)| format!("L={l} {v:.3}")).collect();
    verdict(
        spiral.iter().all(|p| p.1 < 0.0) && hex.abs() <= 0.1,
        format!("heterogeneous r: {}; hexagonal r at L=1024 {hex:.3}", shown.join(", ")),
    )
}

fn hierarchy(s: &Scaling) -> Verdict {
    let largest = s.spiral.last().unwrap();
    let pooled = largest.pooled_local_clustering_slope;
    let per_sample = largest.local_clustering_slope.and_then(|e| e.mean);
    verdict(
        pooled.is_some_and(|v| (v + 1.0).abs() <= 0.3),
        format!(
            "L=1024 ensemble C_local(k) slope {:.3} (per-network mean {:.3}); target -1 +- 0.3",
            pooled.unwrap_or(f64::NAN),
            per_sample.unwrap_or(f64::NAN)
        ),
    )
}

// ---- criterion 8 -----------------------------------------------------------

fn criticality_optimum() -> Verdict {
    let mut config = ExperimentConfig::default();
    config.lattice_size = 256;
    config.samples = 64;
    config.seed = 4;
    config.theta = (-6..=6).map(|i| THETA_C + 0.05 * i as f64).collect();
    let (sweep, _) = sweep_parameter(&config, Depth::Lcc).unwrap();
    let curve: Vec<String> = sweep
        .points
        .iter()
        .map(|p| format!("{:.3}:{:.1}", p.value, p.lcc_links.mean.unwrap_or(f64::NAN)))
        .collect();
    say(&format!("  mean LCC links by theta: {}", curve.join(" ")));
    let best = sweep.argmax().unwrap();
    verdict(
        (best - THETA_C).abs() <= 0.1 + 1e-9,
        format!(
            "argmax theta {best:.4}, |theta - theta_c| = {:.4} (limit 0.1)",
            (best - THETA_C).abs()
        ),
    )
}

// ---- criterion 9 -----------------------------------------------------------

fn sdrg_time(l: u32) -> Duration {
    let spec = LatticeSpec::new(l).unwrap();
    let instance = sample_disorder(spec, DisorderModel::FixedH { theta: THETA_C }, 9).unwrap();
    let started = Instant::now();
    let decomp = run_sdrg(&instance).unwrap();
    let elapsed = started.elapsed();
    assert_eq!(decomp.labels().len(), spec.sites());
    elapsed
}

fn performance() -> Verdict {
    let small = sdrg_time(1024);
    let large = sdrg_time(4096);
    verdict(
        small <= Duration::from_secs(60) && large <= Duration::from_secs(30 * 60),
        format!("L=1024 {small:.1?} (limit 60 s), L=4096 {large:.1?} (limit 30 min)"),
    )
}

// ---- criterion 10 ----------------------------------------------------------

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    WalkDir::new(dir)
        .sort_by_file_name()
        .into_iter()
        .map(Result::unwrap)
        .filter(|e| e.file_type().is_file())
        .map(|e| {
            let rel = e.path().strip_prefix(dir).unwrap().to_string_lossy().into_owned();
            (rel, fs::read(e.path()).unwrap())
        })
        .collect()
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.txt");
    fs::write(
        &config,
        "lattice_size = 128\nvariant = fixed-h\ntheta = -0.3, -0.17034\nsamples = 4\nseed = 10\n",
    )
    .unwrap();
    let run = |workers: &str, out: &Path| {
        let status = Command::new(env!("CARGO_BIN_EXE_spinweb"))
            .args(["pipeline", "--config"])
            .arg(&config)
            .args(["--workers", workers, "--output"])
            .arg(out)
            .env("RUST_LOG", "warn")
            .status()
            .unwrap();
        assert!(status.success(), "pipeline exited with {status}");
        tree(out)
    };
    let one = run("1", &tmp.path().join("one"));
    let four = run("4", &tmp.path().join("four"));
    let bytes: usize = one.iter().map(|f| f.1.len()).sum();
    verdict(
        one == four && !one.is_empty(),
        format!(
            "{} files, {bytes} bytes; workers 1 and 4 identical: {}",
            one.len(),
            one == four
        ),
    )
}

// ----------------------------------------------------------------------------

#[test]
fn acceptance() {
    say("");
    let mut failures = Vec::new();
    let mut record = |id: u32, name: &str, v: Verdict| {
        let line = format!(
            "criterion {id:>2} {name}: {} ({})",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        say(&line);
        if !v.pass {
            failures.push(line);
        }
    };
    record(1, "decimation rule fidelity", rule_fidelity());
    record(2, "oracle equivalence", oracle_equivalence());
    record(3, "analytic graph fixtures", analytic_fixtures());
    let scaling = ensembles();
    record(4, "degree exponent", degree_exponent(&scaling));
    record(5, "small-world scaling", small_world(&scaling));
    record(6, "disassortativity", disassortativity(&scaling));
    record(7, "hierarchy", hierarchy(&scaling));
    record(8, "criticality optimum", criticality_optimum());
    record(9, "performance budget", performance());
    record(10, "determinism", determinism());
    assert!(failures.is_empty(), "failed criteria:\n{}", failures.join("\n"));
}
