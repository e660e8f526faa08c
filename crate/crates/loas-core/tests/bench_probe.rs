use loas_core::asp::AspCtx;
use loas_core::bench::*;
use loas_core::engine::{EngineConfig, Strategy};

#[test]
#[ignore]
fn probe_bench_scale() {
    let (b, space) = generate_scheduling_task(3, 3).unwrap();
    println!("space size: {}", space.len());
    let t0 = std::time::Instant::now();
    let world = RankingWorld::new(&b, &space, &AspCtx::default()).unwrap();
    println!("world build: {:?} ({} answer sets)", t0.elapsed(), world.answer_sets.len());

    let cfg = EngineConfig { strategy: Strategy::Direct, ..Default::default() };
    for n in [2usize, 5, 10, 20] {
        let spec = BenchSpec { num_targets: 5, trials_per_target: 3, num_examples: n, seed: 42, ..Default::default() };
        let t1 = std::time::Instant::now();
        let rows = run_accuracy(&spec, &cfg).unwrap();
        let mean: f64 = rows.iter().map(|r| r.accuracy).sum::<f64>() / rows.len() as f64;
        let max_wall = rows.iter().map(|r| r.wall_ms).max().unwrap();
        let max_iter = rows.iter().map(|r| r.iterations).max().unwrap();
        println!("n={n}: mean acc {mean:.3}, total {:?}, max wall {max_wall}ms, max iter {max_iter}", t1.elapsed());
    }
}
