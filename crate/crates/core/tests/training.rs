use scenesearch::harness::{eval_policy, SuiteConfig};
use scenesearch::reward::RewardParams;
use scenesearch::trainer::{collect_teacher_dataset, dataset_digest, train, TrainConfig};
use scenesearch::world::GenProfile;

fn serial_suite() -> SuiteConfig {
    SuiteConfig {
        parallel: false,
        ..Default::default()
    }
}

#[test]
fn offline_set_has_500_usable_records_and_a_stable_digest() {
    let cfg = TrainConfig::default();
    let a = collect_teacher_dataset(&cfg.train_seeds, 500, &cfg, &GenProfile::default()).unwrap();
    let b = collect_teacher_dataset(&cfg.train_seeds, 500, &cfg, &GenProfile::default()).unwrap();
    assert_eq!(a.len(), 500);
    // Candidates are the executable actions plus done(), so a decodable
    // record has an executable teacher label.
    for r in &a {
        r.decode().unwrap();
    }
    assert_eq!(dataset_digest(&a), dataset_digest(&b));
}

#[test]
fn sft_only_still_beats_the_untrained_student() {
    let cfg = TrainConfig {
        rl: false,
        ..Default::default()
    };
    let out = train(&cfg, &RewardParams::default(), &GenProfile::default()).unwrap();
    let suite = serial_suite();
    let before = eval_policy(&out.initial, "untrained", &suite).unwrap().0;
    let after = eval_policy(&out.policy, "sft-only", &suite).unwrap().0;
    assert!(after.sr > before.sr, "SR {} -> {}", before.sr, after.sr);
}

#[test]
fn training_is_bit_reproducible() {
    let cfg = TrainConfig {
        num_epochs: 1,
        ..Default::default()
    };
    let a = train(&cfg, &RewardParams::default(), &GenProfile::default()).unwrap();
    let b = train(&cfg, &RewardParams::default(), &GenProfile::default()).unwrap();
    assert_eq!(a, b);
    let other = train(&TrainConfig { seed: 1, ..cfg }, &RewardParams::default(), &GenProfile::default()).unwrap();
    assert_ne!(a.policy, other.policy);
}
