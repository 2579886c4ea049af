//! Times the renormalization and the spiral packing at a few lattice sizes.
//!
//! cargo run --release -p spinweb --example sdrg_timing -- 256 512 1024

use std::time::Instant;

use spinweb::lattice::{sample_disorder, DisorderModel, LatticeSpec, THETA_C};
use spinweb::placement::pack_spiral;
use spinweb::sdrg::run_sdrg_with_stats;

fn main() {
    let sizes: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    for l in if sizes.is_empty() { vec![128, 256, 512] } else { sizes } {
        let spec = LatticeSpec::new(l).unwrap();
        let inst = sample_disorder(spec, DisorderModel::FixedH { theta: THETA_C }, 1).unwrap();
        let t = Instant::now();
        let run = run_sdrg_with_stats(&inst).unwrap();
        let sdrg = t.elapsed();
        eprintln!("L={l} sdrg done in {sdrg:?}");
        let largest = run.decomposition.sizes().iter().max().copied().unwrap_or(0);
        let t = Instant::now();
        let layout = pack_spiral(spec, 1, 2.67, 2.0, l as f64 / 8.0, 0.3).unwrap();
        let pack = t.elapsed();
        println!(
            "L={l} sdrg={sdrg:?} clusters={} largest={largest} max_degree={} peak_heap={} stale={} | pack={pack:?} nodes={} coverage={:.4}",
            run.decomposition.cluster_count(),
            run.stats.max_degree,
            run.stats.peak_heap,
            run.stats.stale_pops,
            layout.node_count(),
            layout.coverage
        );
        println!("  degree histogram (log2 buckets): {:?}", run.stats.degree_histogram);
    }
}
