mod support;

use std::net::{TcpListener, TcpStream};
use std::thread;

use qaes_core::modes::{BlockMode, Mode};
use qaes_core::net::*;
use qaes_core::Bb84Config;
use support::random_bytes;

fn configs(seed: u64, n_pump: usize, payload: Vec<u8>) -> (MasterConfig, SlaveConfig) {
    let bb84 = Bb84Config {
        n_pump,
        p_noise: 0.0,
        seed,
        ..Default::default()
    };
    let slave = SlaveConfig::from_bb84(&bb84, seed.wrapping_mul(31).wrapping_add(7));
    (MasterConfig::new(bb84, SessionParams::default(), payload), slave)
}

#[test]
fn seed_fixed_runs_are_byte_identical() {
    let (m, s) = configs(5, 3000, random_bytes(5000, 1));
    let eve = EveConfig {
        eve_fraction: 0.02,
        scope: TapScope::Quantum,
        seed: 77,
    };
    let a = run_lockstep(m.clone(), s.clone(), Some(eve));
    let b = run_lockstep(m, s, Some(eve));
    assert_eq!(a.transcript.to_string(), b.transcript.to_string());
    assert_eq!(a.master, b.master);
}

#[test]
fn eve_at_zero_fraction_leaves_transcript_unchanged() {
    let (m, s) = configs(6, 3000, b"hello".to_vec());
    let plain = run_lockstep(m.clone(), s.clone(), None);
    let tapped = run_lockstep(
        m,
        s,
        Some(EveConfig {
            eve_fraction: 0.0,
            scope: TapScope::Quantum,
            seed: 1,
        }),
    );
    assert_eq!(plain.transcript, tapped.transcript);
    assert!(plain.keys_agree());
}

#[test]
fn classical_only_eve_changes_nothing() {
    let (m, s) = configs(7, 3000, b"hello".to_vec());
    let plain = run_lockstep(m.clone(), s.clone(), None);
    let tapped = run_lockstep(
        m,
        s,
        Some(EveConfig {
            eve_fraction: 1.0,
            scope: TapScope::ClassicalOnly,
            seed: 1,
        }),
    );
    assert_eq!(plain.slave.qber, tapped.slave.qber);
    assert_eq!(plain.transcript, tapped.transcript);
}

#[test]
fn full_intercept_aborts_at_qber_phase() {
    let (m, s) = configs(8, 20_000, b"secret".to_vec());
    let run = run_lockstep(m, s, Some(EveConfig::intercept_all(3)));
    assert!(run.mutual_abort());
    let q = run.slave.qber.unwrap();
    assert!((q - 0.25).abs() < 0.03, "{q}");
    assert!(matches!(
        run.slave.outcome,
        Some(Outcome::Aborted {
            reason: AbortReason::QberExceeded(_),
            by_peer: false
        })
    ));
    assert_eq!(run.transcript.count(Tag::KeyConfirm), 0);
    // ABORT from the slave and the master's echo.
    assert_eq!(run.transcript.count(Tag::Abort), 2);
    run.transcript.validate().unwrap();
}

#[test]
fn params_256_builds_fourteen_round_context() {
    let (mut m, s) = configs(9, 3000, vec![1; 100]);
    m.params.key_len = 256;
    m.params.block_mode = BlockMode::RawBlock;
    let run = run_lockstep(m, s, None);
    assert!(run.keys_agree());
    let p = run.slave.params.unwrap();
    assert_eq!(qaes_core::params_for_key_len(p.key_len).unwrap().nr(), 14);
    assert_eq!(run.slave.received, vec![1; 100]);
}

#[test]
fn confirmation_bits_are_discarded() {
    let (m, s) = configs(10, 3000, vec![]);
    let run = run_lockstep(m, s, None);
    assert!(run.keys_agree());
    let sifted = run.master.n_sifted;
    let sampled = qaes_core::qkd::sample_size(sifted, 0.2);
    assert_eq!(run.master.key.len(), sifted - sampled - CONFIRM_BITS);
    assert_eq!(run.transcript.count(Tag::Data), 1);
}

#[test]
fn transcript_dump_parses_back() {
    let (m, s) = configs(11, 3000, vec![3; 10]);
    let run = run_lockstep(m, s, None);
    let text = run.transcript.to_string();
    let parsed = Transcript::parse(&text).unwrap();
    assert_eq!(parsed, run.transcript);
    parsed.validate().unwrap();
    let first: Vec<&str> = text.lines().next().unwrap().split(' ').collect();
    assert_eq!(&first[..4], &["0", "M>S", "HELLO", "13"]);
}

#[test]
fn large_payload_is_split_across_frames() {
    let payload = random_bytes(MAX_FRAME + 1000, 4);
    let (m, s) = configs(12, 3000, payload.clone());
    let run = run_lockstep(m, s, None);
    assert!(run.keys_agree());
    assert_eq!(run.transcript.count(Tag::Data), 2);
    assert_eq!(run.slave.received, payload);
}

#[test]
fn online_mode_over_lockstep() {
    let (mut m, s) = configs(13, 40_000, b"online payload".to_vec());
    m.params.mode = Mode::Online;
    let run = run_lockstep(m, s, None);
    assert!(run.keys_agree(), "{:?}", run.master.outcome);
    assert_eq!(run.slave.received, b"online payload");
}

#[test]
fn tcp_with_eve_proxy() {
    let slave_l = TcpListener::bind("127.0.0.1:0").unwrap();
    let eve_l = TcpListener::bind("127.0.0.1:0").unwrap();
    let slave_port = slave_l.local_addr().unwrap().port();
    let eve_port = eve_l.local_addr().unwrap().port();
    let (m, s) = configs(14, 20_000, b"over tcp".to_vec());

    let slave = thread::spawn(move || {
        let mut t = tcp_transport(slave_l.accept().unwrap().0).unwrap();
        run_slave(&mut t, s, None).unwrap()
    });
    let eve = thread::spawn(move || {
        let master_side = tcp_transport(eve_l.accept().unwrap().0).unwrap();
        let slave_side = tcp_transport(TcpStream::connect(("127.0.0.1", slave_port)).unwrap()).unwrap();
        attach_eve(master_side, slave_side, Eve::new(EveConfig::intercept_all(5))).join()
    });
    let mut t = tcp_transport(TcpStream::connect(("127.0.0.1", eve_port)).unwrap()).unwrap();
    let master = run_master(&mut t, m, None).unwrap();
    drop(t);
    let slave = slave.join().unwrap();
    let eve = eve.join().unwrap();
    assert!(master.aborted() && slave.aborted());
    assert_eq!(eve.intercepted(), 20_000);
}

#[test]
fn tcp_clean_run_roundtrips() {
    let l = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = l.local_addr().unwrap().port();
    let payload = random_bytes(70_000, 9);
    let (m, s) = configs(15, 3000, payload.clone());
    let slave = thread::spawn(move || {
        let mut t = tcp_transport(l.accept().unwrap().0).unwrap();
        run_slave(&mut t, s, None).unwrap()
    });
    let mut t = tcp_transport(TcpStream::connect(("127.0.0.1", port)).unwrap()).unwrap();
    let master = run_master(&mut t, m, None).unwrap();
    let slave = slave.join().unwrap();
    assert!(master.completed() && slave.completed());
    assert_eq!(master.key, slave.key);
    assert_eq!(slave.received, payload);
    assert_eq!(master.data_digest, Some(digest64(&payload)));
}
