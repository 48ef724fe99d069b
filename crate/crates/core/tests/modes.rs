mod support;

use proptest::prelude::*;
use qaes_core::modes::{BlockMode, BoxRefresh, KeyRefresh, Mode, OnlineOptions, QaesContext};
use qaes_core::qkd::QuantumKeyStream;
use qaes_core::{params_for_key_len, run_session, Bb84Config, Sbox};
use support::*;

fn contexts(
    mode: Mode,
    key_len: usize,
    bm: BlockMode,
    opts: OnlineOptions,
    stream: &QuantumKeyStream,
) -> (QaesContext, QaesContext) {
    let make = || match mode {
        Mode::Offline => QaesContext::offline_init(&mut stream.clone(), key_len, bm).unwrap(),
        Mode::Online => QaesContext::online(stream.clone(), key_len, bm, opts).unwrap(),
    };
    (make(), make())
}

fn block_mode() -> impl Strategy<Value = BlockMode> {
    prop::sample::select(BlockMode::ALL.to_vec())
}

fn options() -> impl Strategy<Value = OnlineOptions> {
    (
        prop::sample::select(vec![KeyRefresh::PerBlock, KeyRefresh::PerMessage]),
        prop::sample::select(vec![BoxRefresh::PerMessage, BoxRefresh::PerBlock, BoxRefresh::PerRound]),
    )
        .prop_map(|(key_refresh, box_refresh)| OnlineOptions {
            key_refresh,
            box_refresh,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn roundtrip_any_configuration(
        online in any::<bool>(),
        key_idx in 0usize..3,
        bm in block_mode(),
        opts in options(),
        msg in prop::collection::vec(any::<u8>(), 0..200),
        nonce in any::<[u8; 16]>(),
        seed in any::<u64>(),
    ) {
        let key_len = [128, 192, 256][key_idx];
        let mode = if online { Mode::Online } else { Mode::Offline };
        let stream = synthetic_stream(400_000, seed);
        let (mut enc, mut dec) = contexts(mode, key_len, bm, opts, &stream);
        let c = enc.encrypt_message(&msg, &nonce).unwrap();
        if bm.is_stream() {
            prop_assert_eq!(c.len(), msg.len());
        } else {
            prop_assert_eq!(c.len(), (msg.len() / 16 + 1) * 16);
        }
        prop_assert_eq!(dec.decrypt_message(&c, &nonce).unwrap(), msg.clone());
        prop_assert_eq!(enc.stream().map(|s| s.cursor()), dec.stream().map(|s| s.cursor()));
        if let Some(s) = enc.stream() {
            prop_assert_eq!(s.cursor(), enc.bits_for_message(msg.len()));
        }
    }

    #[test]
    fn offline_standard_box_is_classical_aes(
        key_idx in 0usize..3,
        key in prop::collection::vec(any::<u8>(), 32),
        blocks in prop::collection::vec(any::<[u8; 16]>(), 1..6),
    ) {
        let bits = [128, 192, 256][key_idx];
        let key = &key[..bits / 8];
        let mut ctx = QaesContext::offline_with_box(key, params_for_key_len(bits).unwrap(), Sbox::standard().clone(), BlockMode::RawBlock).unwrap();
        for b in &blocks {
            prop_assert_eq!(ctx.encrypt_block(b).unwrap(), crate_encrypt(key, b));
        }
    }
}

#[test]
fn ctr_matches_oracle_keystream_offline() {
    let key = random_bytes(16, 1);
    let mut ctx = QaesContext::offline_with_box(
        &key,
        params_for_key_len(128).unwrap(),
        Sbox::standard().clone(),
        BlockMode::Ctr,
    )
    .unwrap();
    let nonce = [0xff; 16];
    let msg = random_bytes(40, 2);
    let c = ctx.encrypt_message(&msg, &nonce).unwrap();
    for (i, chunk) in msg.chunks(16).enumerate() {
        let ctr = u128::from_be_bytes(nonce).wrapping_add(i as u128).to_be_bytes();
        let ks = crate_encrypt(&key, &ctr);
        for (j, &p) in chunk.iter().enumerate() {
            assert_eq!(c[16 * i + j], p ^ ks[j]);
        }
    }
}

#[test]
fn cfb_and_ofb_match_oracle_chains() {
    let key = random_bytes(24, 3);
    let nonce: [u8; 16] = random_bytes(16, 4).try_into().unwrap();
    let msg = random_bytes(37, 5);
    let params = params_for_key_len(192).unwrap();

    let mut cfb = QaesContext::offline_with_box(&key, params, Sbox::standard().clone(), BlockMode::Cfb).unwrap();
    let c = cfb.encrypt_message(&msg, &nonce).unwrap();
    let mut fb = nonce;
    for (i, chunk) in msg.chunks(16).enumerate() {
        let ks = crate_encrypt(&key, &fb);
        let out = &c[16 * i..16 * i + chunk.len()];
        for j in 0..chunk.len() {
            assert_eq!(out[j], chunk[j] ^ ks[j]);
        }
        if chunk.len() == 16 {
            fb = out.try_into().unwrap();
        }
    }

    let mut ofb = QaesContext::offline_with_box(&key, params, Sbox::standard().clone(), BlockMode::Ofb).unwrap();
    let c = ofb.encrypt_message(&msg, &nonce).unwrap();
    let mut fb = nonce;
    for (i, chunk) in msg.chunks(16).enumerate() {
        fb = crate_encrypt(&key, &fb);
        for j in 0..chunk.len() {
            assert_eq!(c[16 * i + j], chunk[j] ^ fb[j]);
        }
    }
}

#[test]
fn raw_block_padding_layout() {
    let key = random_bytes(16, 6);
    let mut ctx = QaesContext::offline_with_box(
        &key,
        params_for_key_len(128).unwrap(),
        Sbox::standard().clone(),
        BlockMode::RawBlock,
    )
    .unwrap();
    let c = ctx.encrypt_message(&[0xaa; 16], &[0; 16]).unwrap();
    assert_eq!(c.len(), 32);
    assert_eq!(crate_decrypt(&key, c[16..].try_into().unwrap()), [16; 16]);
}

/// Online mode from a fixed BB84 session, all-zero two-block plaintext in
/// CTR with a zero nonce. Block 1 is recomputed by hand from the stream:
/// box from bits 0..256, whitening key from 256..384, round keys after that.
#[test]
fn online_golden_vector() {
    let cfg = Bb84Config {
        n_pump: 10_000,
        p_noise: 0.0,
        seed: 2024,
        ..Default::default()
    };
    let session = run_session(&cfg).unwrap();
    assert!(!session.aborted);
    let stream = session.key_stream();
    let raw = stream.bits().as_bytes().to_vec();

    let mut ctx = QaesContext::online(stream, 128, BlockMode::Ctr, OnlineOptions::default()).unwrap();
    let c = ctx.encrypt_message(&[0u8; 32], &[0; 16]).unwrap();

    let sbox = reference_box(raw[0..32].try_into().unwrap());
    let qk: [u8; 16] = raw[32..48].try_into().unwrap();
    let round_keys: Vec<[u8; 16]> = raw[48..48 + 11 * 16]
        .chunks(16)
        .map(|k| k.try_into().unwrap())
        .collect();
    // Counter block 0 is all zero, so the whitened input is qk itself.
    let block1 = reference_encrypt(&qk, &round_keys, &sbox);
    assert_eq!(&c[..16], &block1);

    let qk2: [u8; 16] = raw[224..240].try_into().unwrap();
    let keys2: Vec<[u8; 16]> = raw[240..240 + 176].chunks(16).map(|k| k.try_into().unwrap()).collect();
    let mut ctr1 = [0u8; 16];
    ctr1[15] = 1;
    let input2: [u8; 16] = core::array::from_fn(|i| ctr1[i] ^ qk2[i]);
    assert_eq!(&c[16..], &reference_encrypt(&input2, &keys2, &sbox));
    assert_eq!(ctx.stream().unwrap().cursor(), 256 + 2 * 128 * 12);
    let hex: String = c.iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(hex, "2253b64e3bb10a96f60b8e7d1e9a613dae878a683dea27d3434a8bf735c95e36");
}
