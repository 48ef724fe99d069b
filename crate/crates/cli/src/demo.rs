use std::fs;
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Duration;

use clap::{Args, ValueEnum};
use qaes_core::net::{
    attach_eve, run_lockstep, run_master, run_slave, tcp_transport, Eve, EveConfig, MasterConfig, Outcome,
    SessionParams, SessionSummary, SlaveConfig, TapScope, Transcript,
};
use qaes_core::params_for_key_len;
use qaes_core::qkd::Bb84Config;

use crate::error::{CliError, CliResult};
use crate::{keys, CipherArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Role {
    Master,
    Slave,
    Eve,
    /// Master, slave and optional Eve in one process, lockstep.
    Local,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, value_enum)]
    pub role: Role,
    /// Master: port to connect to. Slave and Eve: port to listen on.
    #[arg(long, default_value_t = 7447)]
    pub port: u16,
    /// Eve: slave port to forward to.
    #[arg(long)]
    pub upstream: Option<u16>,
    /// BB84 config. Default: defaults with n_pump = 4000 and a noiseless channel.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Endpoint seed. Master uses the config seed unless given.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Master/local: file to send. Default: empty.
    #[arg(long = "in", short = 'i')]
    pub input: Option<PathBuf>,
    /// Slave/local: where to write the received file.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Write this endpoint's frame transcript here.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    /// Eve/local: fraction of qubits intercepted. Local runs have no Eve unless set.
    #[arg(long)]
    pub eve_fraction: Option<f64>,
    /// Eve/local: only watch classical frames.
    #[arg(long)]
    pub eve_classical_only: bool,
    #[command(flatten)]
    pub cipher: CipherArgs,
}

fn config(args: &DemoArgs) -> CliResult<Bb84Config> {
    match &args.config {
        Some(p) => keys::load_config(Some(p)),
        None => Ok(Bb84Config {
            n_pump: 4000,
            p_noise: 0.0,
            ..Default::default()
        }),
    }
}

fn master_config(args: &DemoArgs) -> CliResult<MasterConfig> {
    let mut bb84 = config(args)?;
    if let Some(seed) = args.seed {
        bb84.seed = seed;
    }
    bb84.validate().map_err(|e| CliError::BadInput(e.to_string()))?;
    params_for_key_len(args.cipher.key_len).map_err(|e| CliError::BadInput(e.to_string()))?;
    let payload = match &args.input {
        Some(p) => fs::read(p).map_err(|e| CliError::read(p, e))?,
        None => Vec::new(),
    };
    let params = SessionParams {
        key_len: args.cipher.key_len,
        mode: args.cipher.mode.into(),
        block_mode: args.cipher.block_mode.into(),
        online: args.cipher.online_options(),
    };
    Ok(MasterConfig::new(bb84, params, payload))
}

fn slave_config(args: &DemoArgs) -> CliResult<SlaveConfig> {
    let bb84 = config(args)?;
    let seed = args.seed.unwrap_or(bb84.seed.wrapping_add(1));
    Ok(SlaveConfig::from_bb84(&bb84, seed))
}

fn eve_config(args: &DemoArgs, fraction: f64) -> CliResult<EveConfig> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(CliError::BadInput(format!("eve fraction {fraction} outside [0, 1]")));
    }
    Ok(EveConfig {
        eve_fraction: fraction,
        scope: if args.eve_classical_only {
            TapScope::ClassicalOnly
        } else {
            TapScope::Quantum
        },
        seed: args.seed.unwrap_or(0),
    })
}

fn write_transcript(path: Option<&Path>, t: &Transcript) -> CliResult {
    match path {
        Some(p) => fs::write(p, t.to_string()).map_err(|e| CliError::write(p, e)),
        None => Ok(()),
    }
}

fn report(s: &SessionSummary) -> CliResult {
    let who = format!("{:?}", s.role).to_lowercase();
    let qber = s.qber.map_or("-".to_string(), |q| format!("{q:.4}"));
    let digest = s.key_digest.map_or("-".to_string(), hex::encode);
    println!(
        "{who}: sifted {} qber {qber} key digest {digest} key bits after confirmation {}",
        s.n_sifted,
        s.key.len()
    );
    match s.outcome {
        Some(Outcome::Completed) => {
            if let Some(d) = s.data_digest {
                println!("{who}: completed, data digest {}", hex::encode(d));
            }
            Ok(())
        }
        Some(Outcome::Aborted { reason, by_peer }) => Err(CliError::Abort(format!(
            "{who}: aborted ({reason:?}{})",
            if by_peer { ", raised by peer" } else { "" }
        ))),
        None => Err(CliError::Abort(format!("{who}: session ended without an outcome"))),
    }
}

fn connect(port: u16) -> CliResult<TcpStream> {
    let mut last = None;
    for _ in 0..100 {
        match TcpStream::connect(("127.0.0.1", port)) {
            Ok(s) => return Ok(s),
            Err(e) => last = Some(e),
        }
        thread::sleep(Duration::from_millis(100));
    }
    Err(CliError::Abort(format!(
        "cannot reach peer on port {port}: {}",
        last.expect("at least one attempt")
    )))
}

fn accept(port: u16) -> CliResult<TcpStream> {
    let listener = TcpListener::bind(("127.0.0.1", port))
        .map_err(|e| CliError::BadInput(format!("cannot listen on port {port}: {e}")))?;
    let (s, _) = listener
        .accept()
        .map_err(|e| CliError::Abort(format!("accept failed: {e}")))?;
    Ok(s)
}

fn transport_error(e: impl std::fmt::Display) -> CliError {
    CliError::Abort(format!("transport failure: {e}"))
}

pub fn demo(args: DemoArgs) -> CliResult {
    let transcript_path = args.transcript.as_deref();
    match args.role {
        Role::Master => {
            let cfg = master_config(&args)?;
            let mut t = tcp_transport(connect(args.port)?).map_err(transport_error)?;
            let mut tr = Transcript::new();
            let s = run_master(&mut t, cfg, Some(&mut tr)).map_err(transport_error)?;
            write_transcript(transcript_path, &tr)?;
            report(&s)
        }
        Role::Slave => {
            let cfg = slave_config(&args)?;
            let mut t = tcp_transport(accept(args.port)?).map_err(transport_error)?;
            let mut tr = Transcript::new();
            let s = run_slave(&mut t, cfg, Some(&mut tr)).map_err(transport_error)?;
            write_transcript(transcript_path, &tr)?;
            if let (Some(out), true) = (&args.out, s.completed()) {
                fs::write(out, &s.received).map_err(|e| CliError::write(out, e))?;
            }
            report(&s)
        }
        Role::Eve => {
            let upstream = args
                .upstream
                .ok_or_else(|| CliError::BadInput("eve needs --upstream <slave port>".into()))?;
            let eve = Eve::new(eve_config(&args, args.eve_fraction.unwrap_or(1.0))?);
            let master_side = tcp_transport(accept(args.port)?).map_err(transport_error)?;
            let slave_side = tcp_transport(connect(upstream)?).map_err(transport_error)?;
            let eve = attach_eve(master_side, slave_side, eve).join();
            println!(
                "eve: intercepted {} qubits, observed {} classical frames",
                eve.intercepted(),
                eve.observed()
            );
            Ok(())
        }
        Role::Local => {
            let m = master_config(&args)?;
            let s = slave_config(&args)?;
            let eve = args.eve_fraction.map(|f| eve_config(&args, f)).transpose()?;
            let run = run_lockstep(m, s, eve);
            write_transcript(transcript_path, &run.transcript)?;
            if let (Some(out), true) = (&args.out, run.slave.completed()) {
                fs::write(out, &run.slave.received).map_err(|e| CliError::write(out, e))?;
            }
            if let Some(n) = run.intercepted {
                println!("eve: intercepted {n} qubits");
            }
            let master = report(&run.master);
            let slave = report(&run.slave);
            master.and(slave)
        }
    }
}
