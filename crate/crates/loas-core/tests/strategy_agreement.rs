//! The native meta strategy, the direct strategy, and the brute-force oracle
//! must return identical solution sets on random micro tasks.

use loas_core::engine::{brute_force_solutions, ilasp2, EngineConfig, Strategy};
use loas_core::micro::random_micro_task;

#[test]
fn strategies_agree_with_oracle_on_micro_tasks() {
    for seed in 0..12u64 {
        let task = random_micro_task(seed);
        let oracle = brute_force_solutions(&task, 16).unwrap();
        let native = ilasp2(&task, &EngineConfig::default()).unwrap();
        assert_eq!(native.solutions, oracle, "native mismatch on seed {seed}");
        let direct = ilasp2(
            &task,
            &EngineConfig { strategy: Strategy::Direct, ..Default::default() },
        )
        .unwrap();
        assert_eq!(direct.solutions, oracle, "direct mismatch on seed {seed}");
    }
}
