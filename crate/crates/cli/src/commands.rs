use anyhow::{bail, Result};
use relaykit::dmt::diversity_fit;
use relaykit::flow::{b1, b2, PowerAllocation};
use relaykit::fullduplex::{b_df, b_lb};
use relaykit::outage::{analytic_curve, mc_outage_many, thm4_target};
use relaykit::power::{delay_limited_table, fig5_data};
use relaykit::protocol::threshold;
use relaykit::{Branch, FlowSplit, McConfig, OutageCurve, Protocol, RateNats, RateTag};
use serde::Serialize;

use crate::args::{
    parse_grid, BoundsArgs, DelayArgs, DelayPreset, DmtArgs, OutageArgs, OutagePreset, RunArgs,
};
use crate::output::{csv_writer, write_meta, write_output};
use crate::UsageError;

const OUTAGE_SAMPLES: u64 = 1_000_000;
const DMT_SAMPLES: u64 = 200_000;
const TABLE_SAMPLES: u64 = 4_000_000;

fn mc_config(run: &RunArgs, default_samples: u64) -> McConfig {
    McConfig::new(run.samples.unwrap_or(default_samples), run.seed).with_workers(run.workers)
}

fn finish<C: Serialize>(run: &RunArgs, command: &str, config: &C, mc: &McConfig) -> Result<()> {
    if let Some(out) = &run.out {
        write_meta(out, command, Some(mc), config)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundsRecord {
    gains: [f64; 3],
    rate_bits: String,
    b_lb: f64,
    b_df: f64,
    b1: f64,
    branch: Option<Branch>,
    split: Option<FlowSplit>,
    power: Option<PowerAllocation>,
    b2: f64,
    b2_branch: Option<Branch>,
    b2_split: Option<FlowSplit>,
    b2_power: Option<PowerAllocation>,
}

type HalfDuplex = (
    f64,
    Option<Branch>,
    Option<FlowSplit>,
    Option<PowerAllocation>,
);

pub fn bounds(args: &BoundsArgs) -> Result<()> {
    let g = args.gains;
    let Some(rate) = args.rate.tag() else {
        return Err(UsageError("one of --rate-bits or --rate-limit is required".into()).into());
    };
    let half = |p: Protocol| -> Result<HalfDuplex> {
        Ok(match rate {
            RateTag::Finite(k) => {
                let sol = if p == Protocol::Hdp1 {
                    b1(&g, k)
                } else {
                    b2(&g, k)
                };
                (
                    sol.bound.value(),
                    Some(sol.branch),
                    Some(sol.split),
                    Some(sol.power_allocation(&g)?),
                )
            }
            _ => (threshold(p, rate, &g), None, None, None),
        })
    };
    let (v1, branch, split, power) = half(Protocol::Hdp1)?;
    let (v2, b2_branch, b2_split, b2_power) = half(Protocol::Hdp2)?;
    let record = BoundsRecord {
        gains: [g.z13, g.z12, g.z23],
        rate_bits: rate.label(),
        b_lb: b_lb(&g).value(),
        b_df: b_df(&g).value(),
        b1: v1,
        branch,
        split,
        power,
        b2: v2,
        b2_branch,
        b2_split,
        b2_power,
    };
    write_output(args.out.as_deref(), |w| {
        serde_json::to_writer(&mut *w, &record)?;
        writeln!(w)?;
        Ok(())
    })?;
    if let Some(out) = &args.out {
        write_meta(out, "bounds", None, args)?;
    }
    Ok(())
}

/// Rate label of a curve; `any` when the curve does not depend on the rate.
fn rate_label(c: &OutageCurve, analytic_part: Option<u8>) -> String {
    match analytic_part {
        Some(4) | Some(6) => "zero".into(),
        Some(_) => "any".into(),
        None if c.protocol.rate_dependent() => c.rate.label(),
        None => "any".into(),
    }
}

pub fn outage(args: &OutageArgs) -> Result<()> {
    let cfg = mc_config(&args.run, OUTAGE_SAMPLES);
    let mut curves: Vec<(OutageCurve, Option<u8>)> = Vec::new();
    let grid = |default: &str| {
        args.snr_db
            .clone()
            .map(|g| g.0)
            .unwrap_or_else(|| parse_grid(default).expect("valid default"))
    };
    match args.preset {
        Some(OutagePreset::Fig2) => {
            let grid = grid("0:40:0.5");
            for part in 1..=6 {
                curves.push((analytic_curve(Some(part), &grid)?, Some(part)));
            }
        }
        Some(preset @ (OutagePreset::Fig3 | OutagePreset::Fig4)) => {
            let grid = grid("0:40:1");
            let protocol = if preset == OutagePreset::Fig3 {
                Protocol::Hdp1
            } else {
                Protocol::Hdp2
            };
            let bits = |b: f64| RateTag::Finite(RateNats::from_bits(b).expect("positive"));
            let rates = [
                RateTag::ZeroLimit,
                bits(1.0),
                bits(3.0),
                bits(6.0),
                RateTag::InfLimit,
            ];
            let specs: Vec<_> = rates.iter().map(|&r| (protocol, r)).collect();
            for c in mc_outage_many(&specs, &grid, &cfg)? {
                curves.push((c, None));
            }
            for part in [1, 2] {
                curves.push((analytic_curve(Some(part), &grid)?, Some(part)));
            }
            curves.push((analytic_curve(None, &grid)?, None));
        }
        None => {
            let grid = grid("0:40:2");
            let needs_rate = args.protocols.iter().any(|p| p.rate_dependent());
            let rate = match (args.rate.tag(), needs_rate) {
                (Some(r), _) => r,
                (None, false) => RateTag::InfLimit,
                (None, true) => {
                    return Err(UsageError(
                        "half-duplex protocols need --rate-bits or --rate-limit".into(),
                    )
                    .into())
                }
            };
            let specs: Vec<_> = args.protocols.iter().map(|&p| (p, rate)).collect();
            for c in mc_outage_many(&specs, &grid, &cfg)? {
                curves.push((c, None));
            }
        }
    }
    write_output(args.run.out.as_deref(), |w| {
        let mut csv = csv_writer(w);
        csv.write_record([
            "snr_db",
            "rate_bits",
            "protocol",
            "estimator",
            "outage",
            "ci_lo",
            "ci_hi",
            "n_samples",
            "seed",
        ])?;
        for (c, part) in &curves {
            let label = rate_label(c, *part);
            let protocol = match part {
                Some(p) => thm4_target(*p).expect("known part").0,
                None => c.protocol,
            };
            for pt in &c.points {
                csv.write_record([
                    pt.rnsnr_db.to_string(),
                    label.clone(),
                    protocol.to_string(),
                    pt.estimator.label().to_string(),
                    pt.prob.to_string(),
                    pt.ci_lo.to_string(),
                    pt.ci_hi.to_string(),
                    pt.n_samples.to_string(),
                    args.run.seed.to_string(),
                ])?;
            }
        }
        csv.flush()?;
        Ok(())
    })?;
    finish(&args.run, "outage", args, &cfg)
}

pub fn dmt(args: &DmtArgs) -> Result<()> {
    let cfg = mc_config(&args.run, DMT_SAMPLES);
    let fits = args
        .protocol
        .iter()
        .map(|&p| {
            if !p.rate_dependent() && p != Protocol::Direct {
                bail!(UsageError(format!("{p} has no rate dependence to fit")));
            }
            Ok(diversity_fit(p, args.mux, &args.snr_db.0, &cfg)?)
        })
        .collect::<Result<Vec<_>>>()?;
    write_output(args.run.out.as_deref(), |w| {
        let mut csv = csv_writer(w);
        csv.write_record([
            "protocol",
            "mux",
            "snr_db",
            "outage",
            "events",
            "n_samples",
            "slope",
            "slope_stderr",
            "target_slope",
            "seed",
        ])?;
        for fit in &fits {
            let target = match fit.protocol {
                Protocol::Direct => 1.0 - fit.multiplexing_gain,
                _ => 2.0 * (1.0 - fit.multiplexing_gain),
            };
            for ((db, p), e) in fit.snr_db_grid.iter().zip(&fit.outage).zip(&fit.events) {
                csv.write_record([
                    fit.protocol.to_string(),
                    fit.multiplexing_gain.to_string(),
                    db.to_string(),
                    p.to_string(),
                    e.to_string(),
                    cfg.samples.to_string(),
                    fit.fitted_slope.to_string(),
                    fit.slope_stderr.to_string(),
                    target.to_string(),
                    cfg.seed.to_string(),
                ])?;
            }
        }
        csv.flush()?;
        Ok(())
    })?;
    finish(&args.run, "dmt", args, &cfg)
}

pub fn delay_limited(args: &DelayArgs) -> Result<()> {
    let cfg = mc_config(&args.run, TABLE_SAMPLES);
    let table = delay_limited_table(&cfg)?;
    write_output(args.run.out.as_deref(), |w| {
        let mut csv = csv_writer(w);
        match args.preset {
            DelayPreset::Table1 => {
                csv.write_record(["quantity", "value_db", "stderr_db"])?;
                for (name, e) in table.rows() {
                    csv.write_record([
                        name.to_string(),
                        e.db().to_string(),
                        e.stderr_db().to_string(),
                    ])?;
                }
            }
            DelayPreset::Fig5 => {
                csv.write_record(["rate_nats", "curve", "snr_linear"])?;
                let rates: Vec<RateNats> = parse_grid("0.25:10:0.25")
                    .expect("valid grid")
                    .into_iter()
                    .map(|b| RateNats::from_bits(b).expect("positive"))
                    .collect();
                for row in fig5_data(&rates, &table) {
                    csv.write_record([
                        row.rate_nats.to_string(),
                        row.curve.to_string(),
                        row.snr_linear.to_string(),
                    ])?;
                }
            }
        }
        csv.flush()?;
        Ok(())
    })?;
    finish(&args.run, "delay-limited", args, &cfg)
}
