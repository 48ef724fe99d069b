mod support;

use proptest::prelude::*;
use qaes_core::aes::{
    decrypt_block, decrypt_block_per_round, encrypt_block, encrypt_block_per_round, expand_key, params_for_key_len,
    RoundKeySet,
};
use qaes_core::{generate_box, Sbox};
use support::*;

#[test]
fn computed_sbox_matches_table() {
    assert_eq!(&reference_sbox(), Sbox::standard().forward());
}

#[test]
fn key_schedule_matches_reference() {
    for (i, bits) in [128, 192, 256].into_iter().enumerate() {
        let key = random_bytes(bits / 8, i as u64);
        let ours = expand_key(&key, params_for_key_len(bits).unwrap()).unwrap();
        assert_eq!(ours.keys(), &reference_expand(&key)[..]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn standard_cipher_matches_both_oracles(
        key_idx in 0usize..3,
        key in prop::collection::vec(any::<u8>(), 32),
        block in any::<[u8; 16]>(),
    ) {
        let bits = [128, 192, 256][key_idx];
        let key = &key[..bits / 8];
        let rks = expand_key(key, params_for_key_len(bits).unwrap()).unwrap();
        let c = encrypt_block(&block, &rks, Sbox::standard());
        prop_assert_eq!(c, crate_encrypt(key, &block));
        prop_assert_eq!(c, reference_encrypt(&block, &reference_expand(key), &reference_sbox()));
        prop_assert_eq!(decrypt_block(&c, &rks, Sbox::standard()), block);
        prop_assert_eq!(crate_decrypt(key, &c), block);
    }

    #[test]
    fn arbitrary_box_and_round_keys_match_reference(
        seed in any::<[u8; 32]>(),
        keys in prop::collection::vec(any::<[u8; 16]>(), 11),
        block in any::<[u8; 16]>(),
    ) {
        let b = generate_box(&seed).unwrap();
        let rks = RoundKeySet::from_keys(params_for_key_len(128).unwrap(), keys.clone()).unwrap();
        let c = encrypt_block(&block, &rks, b.sbox());
        prop_assert_eq!(c, reference_encrypt(&block, &keys, b.forward()));
        prop_assert_eq!(decrypt_block(&c, &rks, b.sbox()), block);
    }

    #[test]
    fn per_round_boxes_match_reference(
        seeds in prop::collection::vec(any::<[u8; 32]>(), 14),
        keys in prop::collection::vec(any::<[u8; 16]>(), 15),
        block in any::<[u8; 16]>(),
    ) {
        let boxes: Vec<Sbox> = seeds.iter().map(|s| generate_box(s).unwrap().into_sbox()).collect();
        let tables: Vec<[u8; 256]> = boxes.iter().map(|b| *b.forward()).collect();
        let rks = RoundKeySet::from_keys(params_for_key_len(256).unwrap(), keys.clone()).unwrap();
        let c = encrypt_block_per_round(&block, &rks, &boxes).unwrap();
        prop_assert_eq!(c, reference_encrypt_rounds(&block, &keys, &tables));
        prop_assert_eq!(decrypt_block_per_round(&c, &rks, &boxes).unwrap(), block);
    }
}
