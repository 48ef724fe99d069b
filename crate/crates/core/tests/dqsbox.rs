mod support;

use proptest::prelude::*;
use qaes_core::dqsbox::{correlation_profile, ValueGrid};
use qaes_core::generate_box;
use support::*;

const FIXTURE_A: &str = include_str!("../fixtures/dqs_box1.txt");
const FIXTURE_B: &str = include_str!("../fixtures/dqs_box2.txt");

#[test]
fn mask_oracle() {
    assert_eq!(mask_for(1), 1);
    assert_eq!(mask_for(2), 3);
    assert_eq!(mask_for(4), 7);
    assert_eq!(mask_for(255), 255);
}

#[test]
fn generation_matches_shuffle_oracle() {
    for seed in 0..20 {
        let key: [u8; 32] = random_bytes(32, seed).try_into().unwrap();
        assert_eq!(generate_box(&key).unwrap().forward(), &reference_box(&key));
    }
}

#[test]
fn fixtures_parse_with_expected_corners() {
    let a: ValueGrid = FIXTURE_A.parse().unwrap();
    let b: ValueGrid = FIXTURE_B.parse().unwrap();
    assert_eq!(a.0[0][0], 0x02);
    assert_eq!(a.0[15][15], 0x04);
    assert_eq!(b.0[0][0], 0x0c);
    assert_eq!(b.0[15][15], 0x0b);
    assert_eq!(a.max(), 0x0f);
}

#[test]
fn fixture_rows_match_direct_computation() {
    let a: ValueGrid = FIXTURE_A.parse().unwrap();
    let b: ValueGrid = FIXTURE_B.parse().unwrap();
    let p = correlation_profile(&a, &b);
    for i in 0..16 {
        let want = reference_row_independence(&a.0[i], &b.0[i]);
        match (p.rows[i].independence, want) {
            (Some(x), Some(y)) => assert!((x - y).abs() < 1e-9, "row {i}: {x} vs {y}"),
            (x, y) => assert_eq!(x, y),
        }
    }
}

#[test]
fn identical_grids_are_fully_dependent() {
    let a: ValueGrid = FIXTURE_A.parse().unwrap();
    let p = correlation_profile(&a, &a);
    assert!(p.rows.iter().all(|r| r.independence.unwrap().abs() < 1e-9));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn every_key_gives_a_permutation(key in any::<[u8; 32]>()) {
        let b = generate_box(&key).unwrap();
        let mut seen = [false; 256];
        for i in 0..256 {
            let y = b.forward()[i];
            prop_assert!(!seen[y as usize]);
            seen[y as usize] = true;
            prop_assert_eq!(b.inverse()[y as usize] as usize, i);
        }
    }

    #[test]
    fn independence_stays_in_range(ka in any::<[u8; 32]>(), kb in any::<[u8; 32]>()) {
        let a = ValueGrid::from(&generate_box(&ka).unwrap());
        let b = ValueGrid::from(&generate_box(&kb).unwrap());
        let p = correlation_profile(&a, &b);
        for r in &p.rows {
            let v = r.independence.unwrap();
            prop_assert!((0.0..=100.0).contains(&v));
            let w = r.pearson_independence.unwrap();
            prop_assert!((0.0..=100.0).contains(&w));
        }
    }
}
