//! Success-rate sweep for the heuristic packer: bounded-degree
//! spanning sequences into cliques, twenty seeds per host size.
//!
//!     cargo run --release --example packing_rates [levels]

use std::time::Instant;

use treepack::graph::gen;
use treepack::packer::{pack_heuristic, HeuristicConfig, HeuristicOutcome};
use treepack::tree::gen_gl_sequence;

fn main() {
    let levels: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    for n in [20, 30, 40] {
        let g = gen::complete(n);
        let mut ok = 0;
        let mut restarts = 0;
        let started = Instant::now();
        for seed in 0..20u64 {
            let trees = gen_gl_sequence(n, 3, 1000 + seed).expect("sequence generates");
            let mut cfg = HeuristicConfig::new(seed);
            cfg.vortex_levels = levels;
            match pack_heuristic(&g, &trees, &cfg).expect("counts match") {
                HeuristicOutcome::Packed { report, .. } => {
                    ok += 1;
                    restarts += report.restarts_used;
                }
                HeuristicOutcome::Failed { report } => {
                    println!(
                        "  n={n} seed={seed}: failed in {:?} with {} residual edges",
                        report.failed_phase, report.residual_edges
                    );
                }
            }
        }
        println!(
            "n={n}: {ok}/20 packed, {restarts} restarts total, {:.2}s",
            started.elapsed().as_secs_f64()
        );
    }
}
