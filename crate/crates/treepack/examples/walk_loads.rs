//! Measure how walk-assignment cluster loads concentrate around `n/ell`.
//!
//! Generates random degree-capped trees, runs one walk assignment per
//! seed, and reports the distribution of the maximum cluster load and
//! maximum pair load relative to the average `n/ell`.
//!
//! Usage: walk_loads [n] [ell] [delta] [seeds] [slack_percent]

use treepack::tree::gen_random_tree;
use treepack::walk::{walk_assign_tree, WalkEmbedParams};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map_or(10_000, |s| s.parse().unwrap());
    let ell: usize = args.get(2).map_or(5, |s| s.parse().unwrap());
    let delta: usize = args.get(3).map_or(3, |s| s.parse().unwrap());
    let seeds: u64 = args.get(4).map_or(100, |s| s.parse().unwrap());
    let slack: usize = args.get(5).map_or(5, |s| s.parse().unwrap());

    let avg = n / ell;
    let cap = avg + avg * slack / 100;
    println!("n={n} ell={ell} max-degree={delta} seeds={seeds} capacity={cap} (avg {avg})");

    let mut max_loads = Vec::new();
    let mut ok = 0usize;
    for seed in 0..seeds {
        let tree = gen_random_tree(n, delta, seed).expect("tree generation");
        let params = WalkEmbedParams::new(ell, cap, 10_000 + seed);
        let a = walk_assign_tree(&tree, &params).expect("assignment");
        let ml = a.max_load().max(a.max_pair_load());
        if ml <= cap {
            ok += 1;
        }
        max_loads.push(ml);
    }
    max_loads.sort_unstable();
    let pct = |q: usize| max_loads[(max_loads.len() - 1) * q / 100];
    println!(
        "max load (over clusters and pairs): min={} p25={} p50={} p75={} p95={} max={}",
        max_loads[0],
        pct(25),
        pct(50),
        pct(75),
        pct(95),
        max_loads[max_loads.len() - 1]
    );
    println!(
        "within capacity: {ok}/{seeds} ({:.1}%)",
        100.0 * ok as f64 / seeds as f64
    );
}
