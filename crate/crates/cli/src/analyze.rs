use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use qaes_core::dqsbox::{
    box_diagnostics, correlation_profile, generate_box, CorrelationProfile, ValueGrid, KEY_MATERIAL_BYTES,
};
use qaes_core::modes::BOX_BITS;
use qaes_core::qkd::Bb84Config;
use qaes_core::Sbox;

use crate::error::{CliError, CliResult};
use crate::keys;

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Two 16x16 hex grid files.
    #[arg(num_args = 0..=2)]
    pub fixtures: Vec<PathBuf>,
    /// Build both boxes from BB84 sessions with these two seeds instead.
    #[arg(long, num_args = 2, value_names = ["SEED_A", "SEED_B"], conflicts_with = "fixtures")]
    pub keygen: Option<Vec<u64>>,
    /// BB84 config for --keygen. Default: defaults with n_pump = 2000.
    #[arg(long, requires = "keygen")]
    pub config: Option<PathBuf>,
    /// Per-row CSV instead of the text report.
    #[arg(long)]
    pub csv: bool,
}

fn read_grid(path: &PathBuf) -> CliResult<ValueGrid> {
    let text = fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    text.parse()
        .map_err(|e| CliError::BadInput(format!("{}: {e}", path.display())))
}

fn keyed_grid(base: &Bb84Config, seed: u64) -> CliResult<ValueGrid> {
    let cfg = Bb84Config { seed, ..base.clone() };
    let r = keys::session(&cfg)?;
    let material = r.sifted_key.slice(0, BOX_BITS).ok_or_else(|| {
        CliError::Crypto(format!(
            "seed {seed}: {} usable bits, a box needs {BOX_BITS}; raise n_pump",
            r.usable_bits()
        ))
    })?;
    let b = generate_box(&material.as_bytes()[..KEY_MATERIAL_BYTES]).map_err(|e| CliError::Crypto(e.to_string()))?;
    Ok(ValueGrid::from(&b))
}

fn as_sbox(g: &ValueGrid) -> Option<Sbox> {
    let flat: [u8; 256] = core::array::from_fn(|i| g.0[i / 16][i % 16]);
    Sbox::from_permutation(flat).ok()
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map_or(String::new(), |x| format!("{x:.prec$}"))
}

fn csv(p: &CorrelationProfile) -> String {
    let mut out = String::from("row,corr,independence_pct,pearson,pearson_independence_pct\n");
    for (i, r) in p.rows.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{}",
            opt(r.corr, 6),
            opt(r.independence, 3),
            opt(r.pearson, 6),
            opt(r.pearson_independence, 3)
        );
    }
    let _ = writeln!(
        out,
        "mean,{:.6},{:.3},,{:.3}",
        p.mean_abs_corr(),
        p.mean_independence,
        p.mean_pearson_independence
    );
    out
}

fn report(a: &ValueGrid, b: &ValueGrid, p: &CorrelationProfile) -> String {
    let mut out = String::from("row      corr  indep%   pearson  indep%\n");
    for (i, r) in p.rows.iter().enumerate() {
        let cell = |v: Option<f64>, prec: usize| v.map_or("degenerate".to_string(), |x| format!("{x:.prec$}"));
        let _ = writeln!(
            out,
            "{i:>3} {:>9} {:>7} {:>9} {:>7}",
            cell(r.corr, 4),
            cell(r.independence, 3),
            cell(r.pearson, 4),
            cell(r.pearson_independence, 3)
        );
    }
    let _ = writeln!(out, "mean independence        {:.3}%", p.mean_independence);
    let _ = writeln!(out, "mean pearson independence {:.3}%", p.mean_pearson_independence);
    let _ = writeln!(out, "correlation ratio        {:.6}", p.ratio);
    let _ = writeln!(out, "pooled pearson           {}", opt(p.pooled_pearson, 6));
    if p.degenerate_rows() > 0 {
        let _ = writeln!(out, "degenerate rows          {}", p.degenerate_rows());
    }
    for (name, g) in [("a", a), ("b", b)] {
        match as_sbox(g) {
            Some(s) => {
                let d = box_diagnostics(&s);
                let _ = writeln!(
                    out,
                    "box {name}: fixed points {}, differential uniformity {}",
                    d.fixed_points, d.differential_uniformity
                );
            }
            None => {
                let _ = writeln!(out, "box {name}: not a permutation, no diagnostics");
            }
        }
    }
    out
}

pub fn analyze(args: AnalyzeArgs) -> CliResult {
    let (a, b) = match (&args.keygen, args.fixtures.as_slice()) {
        (Some(seeds), _) => {
            let base = match &args.config {
                Some(path) => keys::load_config(Some(path))?,
                None => Bb84Config {
                    n_pump: 2000,
                    ..Default::default()
                },
            };
            (keyed_grid(&base, seeds[0])?, keyed_grid(&base, seeds[1])?)
        }
        (None, [fa, fb]) => (read_grid(fa)?, read_grid(fb)?),
        _ => {
            return Err(CliError::BadInput(
                "give two fixture files or --keygen SEED_A SEED_B".into(),
            ))
        }
    };
    let p = correlation_profile(&a, &b);
    print!("{}", if args.csv { csv(&p) } else { report(&a, &b, &p) });
    Ok(())
}
