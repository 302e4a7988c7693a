//! Subcommand implementations. All numeric output is printed with nine
//! significant digits so repeated runs are byte-identical; frequencies are
//! reported as ordinary (cycles-per-second) values.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use rayon::prelude::*;

use jpm_core::circuit::{
    derive_couplings, derive_levels, n_max, CouplingRates, LevelStructure,
};
use jpm_core::constants::TWO_PI;
use jpm_core::harness::reproduce_table1;
use jpm_core::liouville::{
    build_effective_hamiltonian, build_lindbladian, evolve, DressedCorrection, EvolveOptions,
    HilbertLayout, JointState,
};
use jpm_core::rate_model::{
    absorption_rate, discrimination_error, one_photon_absorption_rate, optimal_time, p_bright,
    p_false, two_step_error, validity_report,
};
use jpm_core::semiclassics::tunneling_rates;

use crate::config::{parse_config, set_field, RunConfig};
use crate::{Cli, CliError, Command};

/// Nine significant digits, scientific notation.
fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::usage("--config PATH is required for this command"))?;
    let mut cfg = parse_config(path)?;
    if let Some(m) = cli.margin {
        cfg.margin = m;
    }
    if let Some(f) = cli.mleq_factor {
        cfg.mleq_factor = f;
    }
    Ok(cfg)
}

/// Level structure plus couplings with tunneling rates filled in: explicit
/// config overrides where present, semiclassical escape rates otherwise.
fn derive_all(cfg: &RunConfig) -> Result<(LevelStructure, CouplingRates), CliError> {
    let levels = derive_levels(&cfg.device)?;
    let bare = derive_couplings(&levels, &cfg.device)?;
    let wkb = tunneling_rates(&levels, &cfg.device, 3)?;
    // The escape-rate output is already angular; explicit overrides are
    // ordinary Hz like every other config frequency.
    let pick = |over: Option<f64>, i: usize| over.map(|hz| TWO_PI * hz).unwrap_or(wkb[i].rate);
    Ok((
        levels,
        bare.with_tunneling(
            pick(cfg.gamma0_hz, 0),
            pick(cfg.gamma1_hz, 1),
            pick(cfg.gamma2_hz, 2),
        ),
    ))
}

/// Print `content` to stdout, or into `dir/name` when an output directory
/// was requested.
fn emit(dir: &Option<PathBuf>, name: &str, content: &str) -> Result<(), CliError> {
    match dir {
        None => {
            use std::io::Write;
            // Tolerate a closed pipe (e.g. `jpm simulate | head`).
            match std::io::stdout().write_all(content.as_bytes()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => Ok(other?),
            }
        }
        Some(d) => {
            std::fs::create_dir_all(d)?;
            let path = d.join(name);
            std::fs::write(&path, content)?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

pub fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Levels => cmd_levels(cli),
        Command::Wkb => cmd_wkb(cli),
        Command::Rates => cmd_rates(cli),
        Command::Simulate => cmd_simulate(cli),
        Command::Ratecurves => cmd_ratecurves(cli),
        Command::Protocol => cmd_protocol(cli),
        Command::Table1 => cmd_table1(cli),
        Command::Check => cmd_check(cli),
        Command::Sweep { field, field2 } => cmd_sweep(cli, field, field2.as_deref()),
    }
}

fn cmd_levels(cli: &Cli) -> Result<ExitCode, CliError> {
    let cfg = load_config(cli)?;
    let lv = derive_levels(&cfg.device)?;
    let bound = jpm_core::semiclassics::bound_level_count(&lv);
    let mut s = String::new();
    writeln!(s, "quantity,value,unit").unwrap();
    writeln!(s, "wj,{},J", fmt9(lv.wj)).unwrap();
    writeln!(s, "wc,{},J", fmt9(lv.wc)).unwrap();
    writeln!(s, "omega_p_over_2pi,{},Hz", fmt9(lv.omega_p / TWO_PI)).unwrap();
    writeln!(s, "n0,{},1", fmt9(lv.n0)).unwrap();
    writeln!(s, "omega10_over_2pi,{},Hz", fmt9(lv.omega10 / TWO_PI)).unwrap();
    writeln!(s, "omega20_over_2pi,{},Hz", fmt9(lv.omega20 / TWO_PI)).unwrap();
    writeln!(s, "omega_over_2pi,{},Hz", fmt9(lv.omega / TWO_PI)).unwrap();
    writeln!(s, "delta_over_2pi,{},Hz", fmt9(lv.delta / TWO_PI)).unwrap();
    writeln!(s, "phi_min,{},rad", fmt9(lv.phi_min)).unwrap();
    writeln!(s, "delta_max,{},rad", fmt9(lv.delta_max)).unwrap();
    writeln!(s, "bound_levels,{bound},1").unwrap();
    emit(&cli.out, "levels.csv", &s)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_wkb(cli: &Cli) -> Result<ExitCode, CliError> {
    let cfg = load_config(cli)?;
    let lv = derive_levels(&cfg.device)?;
    let results = tunneling_rates(&lv, &cfg.device, 3)?;
    let mut s = String::new();
    writeln!(
        s,
        "level,energy_j,inner_turning_point_rad,outer_turning_point_rad,action_hbar,rate_over_2pi_hz"
    )
    .unwrap();
    for r in &results {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            r.level_index,
            fmt9(r.energy),
            fmt9(r.turning_points.0),
            fmt9(r.turning_points.1),
            fmt9(r.action),
            fmt9(r.rate / TWO_PI)
        )
        .unwrap();
    }
    emit(&cli.out, "wkb.csv", &s)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_rates(cli: &Cli) -> Result<ExitCode, CliError> {
    let cfg = load_config(cli)?;
    let (_, cr) = derive_all(&cfg)?;
    let b20 = absorption_rate(2, &cr);
    let (b10, ratio) = one_photon_absorption_rate(&cr);
    let mut s = String::new();
    writeln!(s, "quantity,value,unit").unwrap();
    writeln!(s, "lambda1,{},1", fmt9(cr.lambda1)).unwrap();
    writeln!(s, "lambda2,{},1", fmt9(cr.lambda2)).unwrap();
    writeln!(s, "g1_over_2pi,{},Hz", fmt9(cr.g1 / TWO_PI)).unwrap();
    writeln!(s, "g2_over_2pi,{},Hz", fmt9(cr.g2 / TWO_PI)).unwrap();
    writeln!(s, "g_tilde_over_2pi,{},Hz", fmt9(cr.g_tilde / TWO_PI)).unwrap();
    writeln!(s, "chi1_over_2pi,{},Hz", fmt9(cr.chi1 / TWO_PI)).unwrap();
    writeln!(s, "chi2_over_2pi,{},Hz", fmt9(cr.chi2 / TWO_PI)).unwrap();
    writeln!(s, "gamma0,{},Hz", fmt9(cr.gamma0 / TWO_PI)).unwrap();
    writeln!(s, "gamma1,{},Hz", fmt9(cr.gamma1 / TWO_PI)).unwrap();
    writeln!(s, "gamma2,{},Hz", fmt9(cr.gamma2 / TWO_PI)).unwrap();
    writeln!(s, "gamma10,{},Hz", fmt9(cr.gamma10 / TWO_PI)).unwrap();
    writeln!(s, "gamma21,{},Hz", fmt9(cr.gamma21 / TWO_PI)).unwrap();
    writeln!(s, "gamma11,{},Hz", fmt9(cr.gamma11 / TWO_PI)).unwrap();
    writeln!(s, "gamma22,{},Hz", fmt9(cr.gamma22 / TWO_PI)).unwrap();
    writeln!(s, "b20_over_2pi,{},Hz", fmt9(b20 / TWO_PI)).unwrap();
    writeln!(s, "b10_over_2pi,{},Hz", fmt9(b10 / TWO_PI)).unwrap();
    writeln!(s, "b20_over_b10,{},1", fmt9(ratio)).unwrap();
    writeln!(s, "n_max,{},photons", n_max(&cr, cfg.margin)).unwrap();
    writeln!(s, "n_max_margin_1,{},photons", n_max(&cr, 1.0)).unwrap();
    emit(&cli.out, "rates.csv", &s)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(cli: &Cli) -> Result<ExitCode, CliError> {
    let cfg = load_config(cli)?;
    let (levels, cr) = derive_all(&cfg)?;
    let layout = HilbertLayout::new(cfg.n_fock)?;
    if cfg.initial_jpm > 2 || cfg.initial_fock >= cfg.n_fock {
        return Err(CliError::domain(format!(
            "initial state |{},{}> outside the truncated space (3 junction levels, {} Fock states)",
            cfg.initial_jpm, cfg.initial_fock, cfg.n_fock
        )));
    }
    let h = build_effective_hamiltonian(&layout, levels.delta, &cr);
    let mut lv = build_lindbladian(&cr, &layout, h);
    if cfg.dressed {
        lv.dressed = Some(DressedCorrection::new(&cr));
    }
    let start = JointState::pure(&layout, cfg.initial_jpm, cfg.initial_fock);
    let times = cfg.t_grid.samples();
    let traj = evolve(&start, &lv, &times, &EvolveOptions::default())?;

    let jpm_name = |j: usize| if j == 3 { "m".to_string() } else { j.to_string() };
    let mut s = String::new();
    write!(s, "time_s").unwrap();
    for j in 0..4 {
        for nph in 0..cfg.n_fock {
            write!(s, ",pop_{}_n{}", jpm_name(j), nph).unwrap();
        }
    }
    writeln!(s, ",p_click").unwrap();
    let clicks = traj.click_probabilities();
    for (k, st) in traj.states.iter().enumerate() {
        write!(s, "{}", fmt9(st.time)).unwrap();
        for i in 0..layout.dim() {
            write!(s, ",{}", fmt9(st.rho[(i, i)].re)).unwrap();
        }
        writeln!(s, ",{}", fmt9(clicks[k])).unwrap();
    }
    emit(&cli.out, "trajectory.csv", &s)?;
    if traj.edge_flagged {
        eprintln!(
            "warning: population reached the highest Fock state; increase n_fock (currently {})",
            cfg.n_fock
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_ratecurves(cli: &Cli) -> Result<ExitCode, CliError> {
    let cfg = load_config(cli)?;
    let (_, cr) = derive_all(&cfg)?;
    let (t_opt, eps_min) = optimal_time(&cr)?;
    let mut s = String::new();
    writeln!(s, "# t_opt_s = {}", fmt9(t_opt)).unwrap();
    writeln!(s, "# eps_min = {}", fmt9(eps_min)).unwrap();
    writeln!(s, "time_s,p_false,p_bright,p_miss,eps,formulas_valid").unwrap();
    for t in cfg.t_grid.samples() {
        let pf = p_false(t, cr.gamma0);
        let (pb, valid) = p_bright(t, &cr);
        let eps = discrimination_error(t, &cr, (0.5, 0.5))?;
        writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt9(t),
            fmt9(pf),
            fmt9(pb),
            fmt9(1.0 - pb),
            fmt9(eps),
            valid
        )
        .unwrap();
    }
    emit(&cli.out, "ratecurves.csv", &s)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_protocol(cli: &Cli) -> Result<ExitCode, CliError> {
    let cfg = load_config(cli)?;
    let (levels, cr) = derive_all(&cfg)?;
    let rep = two_step_error(&cr, TWO_PI * cfg.gamma1_two_level_hz, [1.0 / 3.0; 3], None)?;
    let checks = validity_report(
        &cfg.device,
        &levels,
        &cr,
        rep.t_opt,
        cfg.mleq_factor,
        cfg.temperature_k,
    );
    let mut s = String::new();
    writeln!(s, "quantity,value,unit").unwrap();
    writeln!(s, "t_opt,{},s", fmt9(rep.t_opt)).unwrap();
    writeln!(s, "p_false_at_topt,{},1", fmt9(rep.p_false_at_topt)).unwrap();
    writeln!(s, "p_bright_at_topt,{},1", fmt9(rep.p_bright_at_topt)).unwrap();
    writeln!(s, "eps_min,{},1", fmt9(rep.eps_min)).unwrap();
    writeln!(s, "p_bright_01,{},1", fmt9(rep.p_bright_01)).unwrap();
    writeln!(s, "eps_two_step,{},1", fmt9(rep.eps2)).unwrap();
    writeln!(s, "b20_over_2pi,{},Hz", fmt9(rep.b20 / TWO_PI)).unwrap();
    writeln!(s, "b10_over_2pi,{},Hz", fmt9(rep.b10 / TWO_PI)).unwrap();
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    writeln!(s, "validity_checks_passed,{},1", checks.len() - failed.len()).unwrap();
    writeln!(s, "validity_checks_total,{},1", checks.len()).unwrap();
    emit(&cli.out, "protocol.csv", &s)?;
    if !failed.is_empty() {
        eprintln!("warning: validity conditions not met at factor {}: {}", cfg.mleq_factor, failed.join(", "));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_table1(cli: &Cli) -> Result<ExitCode, CliError> {
    let cfg = load_config(cli)?;
    let rows = reproduce_table1(&cfg.device)?;
    let mut s = String::new();
    writeln!(s, "quantity,reference,computed,deviation,tolerance,status").unwrap();
    let mut all_pass = true;
    for r in &rows {
        all_pass &= r.pass;
        writeln!(
            s,
            "{},{},{},{},{},{}",
            r.quantity,
            fmt9(r.reference),
            fmt9(r.computed),
            fmt9(r.deviation),
            fmt9(r.tolerance),
            if r.pass { "pass" } else { "FAIL" }
        )
        .unwrap();
    }
    emit(&cli.out, "table1.csv", &s)?;
    if all_pass {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: reproduction gate failed");
        Ok(ExitCode::from(3))
    }
}

fn cmd_check(cli: &Cli) -> Result<ExitCode, CliError> {
    let cfg = load_config(cli)?;
    let (levels, cr) = derive_all(&cfg)?;
    let (t_opt, _) = optimal_time(&cr)?;
    let checks = validity_report(
        &cfg.device,
        &levels,
        &cr,
        t_opt,
        cfg.mleq_factor,
        cfg.temperature_k,
    );
    let mut s = String::new();
    writeln!(s, "# measurement time t_opt = {} s, factor = {}", fmt9(t_opt), cfg.mleq_factor).unwrap();
    writeln!(s, "check,ratio,status").unwrap();
    for c in &checks {
        writeln!(s, "{},{},{}", c.name, fmt9(c.ratio), if c.pass { "pass" } else { "FAIL" }).unwrap();
    }
    emit(&cli.out, "check.csv", &s)?;
    Ok(ExitCode::SUCCESS)
}

/// `field=start:stop:points` → (field, linear grid).
fn parse_axis(spec: &str) -> Result<(String, Vec<f64>), CliError> {
    let bad = || CliError::usage(format!("axis `{spec}` must look like field=start:stop:points"));
    let (name, rest) = spec.split_once('=').ok_or_else(bad)?;
    let parts: Vec<&str> = rest.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].parse().map_err(|_| bad())?;
    let points: usize = parts[2].parse().map_err(|_| bad())?;
    if points < 1 {
        return Err(CliError::usage("axis needs at least one point"));
    }
    let grid = if points == 1 {
        vec![start]
    } else {
        (0..points)
            .map(|k| start + (stop - start) * k as f64 / (points - 1) as f64)
            .collect()
    };
    Ok((name.to_string(), grid))
}

fn cmd_sweep(cli: &Cli, field: &str, field2: Option<&str>) -> Result<ExitCode, CliError> {
    let base = load_config(cli)?;
    let (name1, grid1) = parse_axis(field)?;
    let axis2 = field2.map(parse_axis).transpose()?;

    let mut points: Vec<(f64, Option<f64>)> = Vec::new();
    for &v1 in &grid1 {
        match &axis2 {
            None => points.push((v1, None)),
            Some((_, grid2)) => {
                for &v2 in grid2 {
                    points.push((v1, Some(v2)));
                }
            }
        }
    }

    // Validate the field names once up front so a typo is a usage error,
    // not a per-point failure.
    {
        let mut probe = base.clone();
        set_field(&mut probe, &name1, grid1[0]).map_err(|e| CliError::usage(e.0))?;
        if let Some((name2, grid2)) = &axis2 {
            set_field(&mut probe, name2, grid2[0]).map_err(|e| CliError::usage(e.0))?;
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::domain(e.to_string()))?;

    let results: Vec<Result<String, CliError>> = pool.install(|| {
        points
            .par_iter()
            .map(|&(v1, v2)| {
                let mut cfg = base.clone();
                set_field(&mut cfg, &name1, v1)?;
                if let Some(v2) = v2 {
                    set_field(&mut cfg, axis2.as_ref().unwrap().0.as_str(), v2)?;
                }
                let (levels, cr) = derive_all(&cfg)?;
                let wkb = tunneling_rates(&levels, &cfg.device, 3)?;
                let (t_opt, eps_min) = optimal_time(&cr)?;
                let pf = p_false(t_opt, cr.gamma0);
                let (pb, _) = p_bright(t_opt, &cr);
                let mut row = fmt9(v1);
                if let Some(v2) = v2 {
                    row.push(',');
                    row.push_str(&fmt9(v2));
                }
                for v in [
                    levels.delta / TWO_PI,
                    wkb[0].rate / TWO_PI,
                    wkb[1].rate / TWO_PI,
                    wkb[2].rate / TWO_PI,
                    absorption_rate(2, &cr) / TWO_PI,
                    t_opt,
                    pf,
                    pb,
                    eps_min,
                ] {
                    row.push(',');
                    row.push_str(&fmt9(v));
                }
                row.push(',');
                row.push_str(&n_max(&cr, cfg.margin).to_string());
                Ok(row)
            })
            .collect()
    });

    let mut s = String::new();
    write!(s, "{name1}").unwrap();
    if let Some((name2, _)) = &axis2 {
        write!(s, ",{name2}").unwrap();
    }
    writeln!(
        s,
        ",delta_over_2pi_hz,gamma0_wkb_hz,gamma1_wkb_hz,gamma2_wkb_hz,b20_over_2pi_hz,t_opt_s,p_false,p_bright,eps_min,n_max"
    )
    .unwrap();
    for r in results {
        writeln!(s, "{}", r?).unwrap();
    }
    emit(&cli.out, "sweep.csv", &s)?;
    Ok(ExitCode::SUCCESS)
}
