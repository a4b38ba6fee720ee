use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use relaykit::{LinkGains, Protocol, RateNats, RateTag};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "relaykit",
    version,
    about = "Relay-channel thresholds, outage curves, diversity slopes and power control"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Thresholds, flow split and power split for one set of gains.
    Bounds(BoundsArgs),
    /// Outage curves as CSV.
    Outage(OutageArgs),
    /// Diversity slope fits as CSV.
    Dmt(DmtArgs),
    /// Zero-outage power costs as CSV.
    DelayLimited(DelayArgs),
}

/// Options shared by the sampling commands.
#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    /// Gain realizations per estimate.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, env = "RELAYKIT_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum RateLimit {
    Zero,
    Inf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[group(multiple = false)]
pub struct RateArgs {
    /// Rate requirement in bits/s/Hz.
    #[arg(long, value_parser = parse_rate_bits)]
    pub rate_bits: Option<f64>,
    /// Small- or large-rate limit instead of a finite rate.
    #[arg(long, value_enum)]
    pub rate_limit: Option<RateLimit>,
}

impl RateArgs {
    pub fn tag(&self) -> Option<RateTag> {
        match (self.rate_bits, self.rate_limit) {
            (Some(b), _) => Some(RateTag::Finite(
                RateNats::from_bits(b).expect("validated by parser"),
            )),
            (None, Some(RateLimit::Zero)) => Some(RateTag::ZeroLimit),
            (None, Some(RateLimit::Inf)) => Some(RateTag::InfLimit),
            (None, None) => None,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundsArgs {
    /// Link gains z13,z12,z23 (linear).
    #[arg(long, value_parser = parse_gains)]
    #[serde(serialize_with = "serialize_gains")]
    pub gains: LinkGains,
    #[command(flatten)]
    pub rate: RateArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum OutagePreset {
    Fig2,
    Fig3,
    Fig4,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutageArgs {
    #[arg(long, value_enum)]
    pub preset: Option<OutagePreset>,
    /// Protocols to simulate.
    #[arg(long, value_delimiter = ',', value_parser = parse_protocol, default_value = "hdp1,hdp2")]
    pub protocols: Vec<Protocol>,
    #[command(flatten)]
    pub rate: RateArgs,
    /// RNSNR grid in dB as START:STOP:STEP.
    #[arg(long, value_parser = parse_grid_arg)]
    pub snr_db: Option<Grid>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DmtArgs {
    /// Multiplexing gain, strictly between 0 and 1.
    #[arg(long, value_parser = parse_mux)]
    pub mux: f64,
    #[arg(long, alias = "protocols", value_delimiter = ',', value_parser = parse_protocol, default_value = "hdp1")]
    pub protocol: Vec<Protocol>,
    /// SNR grid in dB as START:STOP:STEP.
    #[arg(long, value_parser = parse_grid_arg, default_value = "20:45:5")]
    pub snr_db: Grid,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum DelayPreset {
    Table1,
    Fig5,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DelayArgs {
    #[arg(long, value_enum, default_value = "table1")]
    pub preset: DelayPreset,
    #[command(flatten)]
    pub run: RunArgs,
}

fn serialize_gains<S: serde::Serializer>(g: &LinkGains, s: S) -> Result<S::Ok, S::Error> {
    [g.z13, g.z12, g.z23].serialize(s)
}

fn parse_gains(s: &str) -> Result<LinkGains, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!(
            "expected three comma-separated gains z13,z12,z23, got '{s}'"
        ));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        let x: f64 = p
            .trim()
            .parse()
            .map_err(|_| format!("'{p}' is not a number"))?;
        if !(x > 0.0) || !x.is_finite() {
            return Err(format!("gains must be finite and > 0, got {p}"));
        }
        *slot = x;
    }
    LinkGains::new(v[0], v[1], v[2]).map_err(|e| e.to_string())
}

fn parse_rate_bits(s: &str) -> Result<f64, String> {
    let b: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    RateNats::from_bits(b).map_err(|e| e.to_string())?;
    Ok(b)
}

fn parse_protocol(s: &str) -> Result<Protocol, String> {
    s.parse().map_err(|e: relaykit::Error| e.to_string())
}

fn parse_mux(s: &str) -> Result<f64, String> {
    let m: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if m > 0.0 && m < 1.0 {
        Ok(m)
    } else {
        Err(format!("multiplexing gain must be in (0, 1), got {m}"))
    }
}

/// Evenly spaced grid given on the command line.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

fn parse_grid_arg(s: &str) -> Result<Grid, String> {
    parse_grid(s).map(Grid)
}

/// `START:STOP:STEP`, inclusive of `STOP` when it lies on the grid.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("'{p}' is not a number"))
        })
        .collect::<Result<_, _>>()?;
    let [a, b, step] = parts[..] else {
        return Err(format!("expected START:STOP:STEP, got '{s}'"));
    };
    if !(a.is_finite() && b.is_finite() && step > 0.0 && step.is_finite()) || b < a {
        return Err(format!(
            "grid needs finite START <= STOP and STEP > 0, got '{s}'"
        ));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(format!("grid '{s}' has more than 100000 points"));
    }
    // Rounded so that 0.1 steps print as written.
    Ok((0..=n)
        .map(|i| ((a + step * i as f64) * 1e9).round() / 1e9)
        .collect())
}
