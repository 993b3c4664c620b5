use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use dualbuck::engine::{run_batch, Scenario, TimeSeries};
use dualbuck::modulation::{CarrierConfig, RefParams};
use dualbuck::shortcircuit::{shoot_through_trace, time_to_current_limit, ShootThroughError, ShootThroughParams};
use dualbuck::sweep::{modulation_sweep, SweepConfig};

use crate::config::{dump_scenario, load_scenario};
use crate::plot::charts;
use crate::summary::Summary;
use crate::{ModulationArgs, ShootThroughArgs, SimulateArgs, Switch};

/// Inductance of a stray-only shoot-through path, without embedded inductors.
const STRAY_INDUCTANCE: f64 = 1e-6;

fn resolve(args: &SimulateArgs, path: Option<&Path>) -> Result<Scenario> {
    let mut s = match path {
        Some(p) => load_scenario(p)?,
        None => Scenario::default(),
    };
    if let Some(c) = args.case {
        s.scenario.case = c.into();
    }
    if let Some(f) = args.fidelity {
        s.scenario.fidelity = f.into();
    }
    if let Some(seed) = args.seed {
        s.scenario.seed = seed;
    }
    if let Some(d) = args.duration {
        s.scenario.duration_seconds = d;
    }
    s.validate()?;
    Ok(s)
}

fn write_outputs(dir: &Path, scenario: &Scenario, ts: &TimeSeries) -> Result<Summary> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    if scenario.output.write_csv {
        let path = dir.join("timeseries.csv");
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        ts.write_csv(BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))?;
    }
    let summary = Summary::new(scenario, ts);
    fs::write(dir.join("summary.txt"), summary.render(scenario)).context("writing summary.txt")?;
    if scenario.output.write_plots {
        for (name, chart) in charts(ts, scenario.output.plot_points) {
            let path = dir.join(format!("{name}.svg"));
            fs::write(&path, chart.to_svg()).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    fs::write(dir.join("scenario.toml"), dump_scenario(scenario)?).context("writing scenario.toml")?;
    Ok(summary)
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let jobs: Vec<(Scenario, std::path::PathBuf)> = if args.batch.is_empty() {
        vec![(resolve(&args, args.scenario.as_deref())?, args.out.clone())]
    } else {
        args.batch
            .iter()
            .map(|p| {
                let stem = p.file_stem().map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned());
                Ok((resolve(&args, Some(p))?, args.out.join(stem)))
            })
            .collect::<Result<_>>()?
    };

    if args.dump_config {
        for (s, _) in &jobs {
            print!("{}", dump_scenario(s)?);
        }
        return Ok(());
    }

    let scenarios: Vec<Scenario> = jobs.iter().map(|(s, _)| s.clone()).collect();
    let start = Instant::now();
    let results = run_batch(&scenarios);
    let elapsed = start.elapsed();
    let mut first_error = None;
    for ((scenario, dir), result) in jobs.iter().zip(results) {
        match result {
            Ok(ts) => {
                let summary = write_outputs(dir, scenario, &ts)?;
                println!("{}: {} samples written to {}", scenario.scenario.case.label(), ts.len(), dir.display());
                if let Some(mean) = summary.cc_mean {
                    println!("  battery CC current mean {mean:.2} A");
                }
                println!("  max |i_batt| {:.1} A", summary.i_batt_peak);
                if let Some(d) = summary.v_dc_deviation {
                    println!("  DC-link deviation RMS {:.4} V", d.rms);
                }
            }
            Err(e) => {
                eprintln!("{}: {e}", dir.display());
                first_error.get_or_insert(e);
            }
        }
    }
    println!("wall clock {:.2} s", elapsed.as_secs_f64());
    match first_error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn report_crossing(out: &mut impl Write, label: &str, p: &ShootThroughParams<f64>, limit: f64) -> Result<()> {
    match time_to_current_limit(p, limit) {
        Ok(t) => writeln!(out, "{label}: {limit} A reached after {:.4} µs", t * 1e6)?,
        Err(ShootThroughError::UnreachableLimit { asymptote, .. }) => {
            writeln!(out, "{label}: {limit} A never reached (current settles at {asymptote} A)")?
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

pub fn shoot_through(args: ShootThroughArgs) -> Result<()> {
    let p = ShootThroughParams { i_l0: args.i0, v_dc: args.vdc, r_eq: args.req, l_eq: args.leq };
    p.validate()?;
    if !(args.limit.is_finite()) {
        bail!("--limit must be finite");
    }
    let t_max = args.tmax.unwrap_or(5.0 * p.time_constant());
    if !(t_max > 0.0) {
        bail!("--tmax must be positive");
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "t_seconds,i_amps")?;
    for (t, i) in shoot_through_trace(&p, t_max, args.points) {
        writeln!(out, "{t:e},{i}")?;
    }
    writeln!(out, "time constant {:.4} µs, final current {} A", p.time_constant() * 1e6, p.asymptote())?;
    report_crossing(&mut out, &format!("embedded path ({} µH)", args.leq * 1e6), &p, args.limit)?;
    let stray = ShootThroughParams { l_eq: STRAY_INDUCTANCE, ..p };
    report_crossing(&mut out, &format!("stray-only path ({} µH)", STRAY_INDUCTANCE * 1e6), &stray, args.limit)?;
    Ok(())
}

pub fn modulation_demo(args: ModulationArgs) -> Result<()> {
    let upper = RefParams::new(args.mu, args.fu, 0.0, 0.0);
    let lower = RefParams::new(args.ml, args.fl, 0.0, 0.0);
    upper.validate().context("upper output")?;
    lower.validate().context("lower output")?;
    if !(args.periods > 0.0 && args.dt > 0.0 && args.carrier_hz > 0.0) {
        bail!("--periods, --dt and --carrier-hz must be positive");
    }
    let slowest = args.fu.min(args.fl);
    if !(slowest > 0.0) {
        bail!("reference frequencies must be positive");
    }
    let cfg = SweepConfig {
        upper,
        lower,
        carrier: CarrierConfig::triangle(args.carrier_hz),
        offsets: args.offsets == Switch::On,
        duration: args.periods / slowest,
        dt: args.dt,
    };
    let sweep = modulation_sweep(&cfg)?;

    let file = File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let mut header = vec!["t_seconds".to_owned(), "carrier".to_owned()];
    for group in ["upper_raw", "lower_raw", "upper", "lower", "gate"] {
        header.extend(["a", "b", "c"].map(|p| format!("{group}_{p}")));
    }
    w.write_record(&header)?;
    for s in &sweep.samples {
        let mut row = vec![s.t.to_string(), s.carrier.to_string()];
        for refs in [s.upper_raw, s.lower_raw, s.upper, s.lower] {
            row.extend(refs.map(|v| v.to_string()));
        }
        row.extend(s.gates.map(|g| format!("{:03b}", g.code())));
        w.write_record(&row)?;
    }
    w.flush()?;

    println!("{} samples written to {}", sweep.samples.len(), args.out.display());
    println!("offsets {}", if cfg.offsets { "on" } else { "off" });
    println!("phase  transitions  clamped_samples  transitions_while_clamped  dominance_violations");
    for (name, p) in ["a", "b", "c"].iter().zip(&sweep.phases) {
        println!(
            "{name:<6} {:>11} {:>16} {:>26} {:>21}",
            p.transitions, p.clamped_samples, p.transitions_while_clamped, p.dominance_violations
        );
    }
    println!("total transitions {}", sweep.total_transitions());
    let violations = sweep.dominance_violations();
    if violations > 0 {
        let first = sweep.samples.iter().find(|s| (0..3).any(|i| s.upper[i] < s.lower[i]));
        if let Some(s) = first {
            println!(
                "dominance violated at {violations} phase samples; first at t = {:.6} s (upper below lower, forbidden state possible)",
                s.t
            );
        }
    } else {
        println!("dominance holds at every sample");
    }
    Ok(())
}
