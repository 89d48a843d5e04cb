//! Subcommand bodies.

use crate::run::{invalid, replay_argv, CliError, CliResult, Manifest, Run};
use crate::svg::{self, LinePlot, Series};
use crate::*;
use fqpe::cost::{self, PriorEstimates};
use fqpe::filter::design::{self, verify_grid};
use fqpe::filter::{self as flt, Basis, FilterSeries};
use fqpe::krylov;
use fqpe::model::{self, HubbardSpec, Lattice, NeelPattern, ScalePolicy, SectorBasis, SpectralModel, Spin};
use fqpe::sweep::{self, LambdaChoice, SweepRange};
use serde_json::json;

pub fn execute(cmd: Command, argv: &[String]) -> CliResult<()> {
    if let Command::Rerun(a) = &cmd {
        return rerun(a);
    }
    let common = cmd.common().cloned().expect("non-rerun command has common flags");
    let mut run = Run::new(&common.out)?;
    match cmd {
        Command::Model(a) => cmd_model(&a, &mut run)?,
        Command::Filter(a) => cmd_filter(&a, &mut run)?,
        Command::Krylov(a) => cmd_krylov(&a, &mut run)?,
        Command::Cost(a) => cmd_cost(&a, &mut run)?,
        Command::SweepGaussian(a) => cmd_sweep_gaussian(&a, &mut run)?,
        Command::SweepKrylov(a) => cmd_sweep_krylov(&a, &mut run)?,
        Command::WorstCase(a) => cmd_worst_case(&a, &mut run)?,
        Command::Compare(a) => cmd_compare(&a, &mut run)?,
        Command::Mc(a) => cmd_mc(&a, &mut run)?,
        Command::Rerun(_) => unreachable!(),
    }
    run.finish(argv, common.seed)
}

fn rerun(a: &RerunArgs) -> CliResult<()> {
    let s = std::fs::read_to_string(&a.manifest).map_err(|e| CliError::Io(format!("cannot read {}: {e}", a.manifest.display())))?;
    let m: Manifest = serde_json::from_str(&s).map_err(|e| CliError::Invalid(format!("manifest: {e}")))?;
    if m.argv.first().map(String::as_str) == Some("rerun") {
        return invalid("manifest records a rerun");
    }
    let argv = replay_argv(&m, a.out.as_deref())?;
    let cli = Cli::try_parse_from(std::iter::once("fqpe".to_string()).chain(argv.iter().cloned()))
        .map_err(|e| CliError::Invalid(format!("manifest arguments: {e}")))?;
    execute(cli.command, &argv)
}

fn warn(lines: &[String]) {
    for w in lines {
        println!("WARN: {w}");
    }
}

fn parse_range(s: &str, what: &str) -> CliResult<SweepRange> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return invalid(format!("{what} must be lo:hi:n, got '{s}'"));
    }
    let f = |x: &str| x.trim().parse::<f64>().map_err(|_| CliError::Invalid(format!("bad number '{x}' in {what}")));
    let n = parts[2].trim().parse::<usize>().map_err(|_| CliError::Invalid(format!("bad count '{}' in {what}", parts[2])))?;
    Ok(SweepRange::new(f(parts[0])?, f(parts[1])?, n)?)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    let v: Vec<T> = s
        .split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| CliError::Invalid(format!("bad entry '{x}' in {what}"))))
        .collect::<CliResult<_>>()?;
    if v.is_empty() {
        return invalid(format!("{what} is empty"));
    }
    Ok(v)
}

fn basis(s: &str, eps_he: Option<f64>) -> CliResult<Basis> {
    let b = Basis::parse(s)?;
    if b == Basis::Chebyshev && eps_he.is_none() {
        return invalid("the Chebyshev basis needs --eps-he");
    }
    Ok(b)
}

fn gap_of(m: &SpectralModel) -> CliResult<f64> {
    let g = m.gap();
    if g.is_finite() {
        Ok(g)
    } else {
        invalid("model has a single level and no gap")
    }
}

fn energy_line(name: &str, e: f64, m: &SpectralModel) -> String {
    let g = m.gap();
    if g.is_finite() {
        format!("{name} = {e:.10} (normalized) = {:.6e} gap", e / g)
    } else {
        format!("{name} = {e:.10} (normalized)")
    }
}

fn curve_csv(f: &FilterSeries) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(["x", "abs", "re", "im"]).map_err(err)?;
    for x in verify_grid() {
        let v = f.eval(x);
        w.write_record([format!("{x:e}"), format!("{:e}", v.norm()), format!("{:e}", v.re), format!("{:e}", v.im)]).map_err(err)?;
    }
    csv_string(w)
}

fn csv_string(w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let b = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(b).map_err(|e| CliError::Internal(e.to_string()))
}

fn curve_plot(title: &str, named: &[(&str, &FilterSeries)]) -> LinePlot {
    let grid = verify_grid();
    LinePlot {
        title: title.into(),
        x_label: "x (normalized energy)".into(),
        y_label: "|f(x)|".into(),
        log_y: false,
        series: named.iter().map(|(n, f)| Series { name: n.to_string(), points: grid.iter().map(|&x| (x, f.eval(x).norm())).collect() }).collect(),
    }
}

fn cmd_model(a: &ModelArgs, run: &mut Run) -> CliResult<()> {
    let spec = match &a.spec {
        Some(p) => {
            let s = run.read(p)?;
            let spec: HubbardSpec = serde_json::from_str(&s).map_err(|e| CliError::Invalid(format!("spec JSON: {e}")))?;
            spec.validate()?;
            spec
        }
        None => HubbardSpec::new(Lattice::parse(&a.lattice)?, a.t, a.u, a.nup, a.ndown)?,
    };
    let policy = match (a.margin, a.lambda) {
        (_, Some(l)) => ScalePolicy::Explicit { lambda: l },
        (Some(m), None) => ScalePolicy::Spectral { margin: m },
        (None, None) => ScalePolicy::default(),
    };
    let start = match a.start {
        StartSpin::Up => Spin::Up,
        StartSpin::Down => Spin::Down,
    };
    let dim = SectorBasis::new(spec.sites(), spec.n_up, spec.n_down).len();
    let m = model::hubbard_neel_model(&spec, NeelPattern::parse(&a.neel)?, start, policy)?;
    let p = run.write("model.json", &(m.to_json() + "\n"))?;
    let s = m.scale();
    println!("sector dimension {dim}");
    println!("distinct levels {}", m.len());
    println!("scale lambda = {s:.10}");
    println!("{}", energy_line("E0", m.ground_energy(), &m));
    println!("E0 (raw) = {:.10}", m.ground_energy() * s);
    if m.gap().is_finite() {
        println!("gap = {:.10e} (normalized) = {:.10e} (raw)", m.gap(), m.gap() * s);
    }
    println!("|gamma0|^2 = {:.10e}", m.ground_overlap());
    println!("wrote {}", p.display());
    Ok(())
}

fn cmd_filter(a: &FilterArgs, run: &mut Run) -> CliResult<()> {
    let model = a.model.as_ref().map(|p| run.model(p)).transpose()?;
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| CliError::Invalid(format!("--{name} is required for this design")));
    let (series, extra) = match a.design {
        Design::GaussianTrig | Design::GaussianCheb => {
            let exact = model.as_ref().filter(|m| m.len() >= 2).map(|m| (m.energies()[0], m.energies()[1]));
            let e0 = a.e0.or(exact.map(|e| e.0)).ok_or_else(|| CliError::Invalid("need --e0 or --model".into()))?;
            let e1 = a.e1.or(exact.map(|e| e.1)).ok_or_else(|| CliError::Invalid("need --e1 or --model".into()))?;
            let eps_g = need(a.eps_g, "eps-g")?;
            let mu = a.mu.unwrap_or(e0.clamp(-1.0, 1.0));
            let d = if a.design == Design::GaussianTrig {
                flt::design_gaussian_trig(mu, e0, e1, a.eps_prime, eps_g)?
            } else {
                flt::design_gaussian_cheb(mu, e0, e1, a.eps_prime, eps_g)?
            };
            let extra = json!({ "target": d.target, "order": d.order, "max_deviation": d.max_deviation });
            (d.series, extra)
        }
        Design::MinimaxPoly | Design::MinimaxTrig => {
            let (delta, n) = (need(a.delta, "delta")?, a.n.ok_or_else(|| CliError::Invalid("--n is required".into()))?);
            let d = if a.design == Design::MinimaxPoly {
                flt::design_cheb_minimax_poly(delta, n)?
            } else {
                flt::design_cheb_minimax_trig(delta, n)?
            };
            (d.series, json!({ "delta": delta, "n": n, "eps_n": d.eps_n }))
        }
        Design::Kaiser => {
            let (delta, n) = (need(a.delta, "delta")?, a.n.ok_or_else(|| CliError::Invalid("--n is required".into()))?);
            (flt::design_kaiser_trig(delta, n)?, json!({ "delta": delta, "n": n, "beta": design::kaiser_beta(delta, n) }))
        }
    };
    let report = model.as_ref().map(|m| flt::filtered_state_report(m, &series));
    let out = json!({
        "design": format!("{:?}", a.design),
        "design_info": extra,
        "series": series,
        "sup_norm": series.sup_norm(),
        "lipschitz": flt::lipschitz_bounds(&series),
        "report": report,
    });
    run.json("filter.json", &out)?;
    run.write("filter_curve.csv", &curve_csv(&series)?)?;
    println!("order {} ({} coefficients), sup norm {:.6}", series.order(), series.coeffs().len(), series.sup_norm());
    if let Some(r) = report {
        println!("p_f = {:.6e}, |gamma_f0|^2 = {:.6e}, |f(E0)|^2 = {:.6e}", r.p_f, r.overlap_f0_sq, r.f_at_e0_sq);
    }
    if a.common.emit_svg {
        run.write("filter.svg", &svg::lines(&curve_plot("filter", &[("|f|", &series)])))?;
    }
    Ok(())
}

fn cmd_krylov(a: &KrylovArgs, run: &mut Run) -> CliResult<()> {
    let m = run.model(&a.model)?;
    let b = basis(&a.basis, a.eps_he)?;
    let gap = gap_of(&m)?;
    let epsilon = a.eps_over_gap * gap;
    let lambda = LambdaChoice::parse(&a.lambda)?.value(a.n, epsilon);
    let pair = krylov::build_krylov(&m, b, a.n)?;
    let sol = krylov::solve_modified_ksd(&pair, lambda, a.threshold)?;
    let f = krylov::krylov_filter(&sol, &pair)?;
    let report = flt::filtered_state_report(&m, &f);
    let rel = sweep::plan_relative_cost(&m, &report, b, a.n, epsilon, a.eps_he)?;
    let e0_err = sol.ground_energy - m.ground_energy();
    let out = json!({
        "N": a.n,
        "basis": b,
        "lambda": lambda,
        "solution": sol,
        "E0_err": e0_err,
        "filter": f,
        "report": report,
        "rel_cost": rel,
    });
    run.json("krylov.json", &out)?;
    run.write("krylov_curve.csv", &curve_csv(&f)?)?;
    println!("{}", energy_line("Krylov E0", sol.ground_energy, &m));
    println!("{}", energy_line("E0 error", e0_err, &m));
    println!("retained rank {}, kappa {:.3e}", sol.retained_rank, sol.condition_number);
    println!("p_f = {:.6e}, |gamma_f0|^2 = {:.6e}, |f(E0)|^2 = {:.6e}", report.p_f, report.overlap_f0_sq, report.f_at_e0_sq);
    match rel {
        Some(c) => println!("relative cost {c:.6e}"),
        None => println!("WARN: ground state rejected; no FQPE cost"),
    }
    if a.common.emit_svg {
        run.write("krylov.svg", &svg::lines(&curve_plot(&format!("Krylov filter N={} lambda={lambda:.3e}", a.n), &[("|f|", &f)])))?;
    }
    Ok(())
}

fn cmd_cost(a: &CostArgs, run: &mut Run) -> CliResult<()> {
    let m = run.model(&a.model)?;
    let gap = gap_of(&m)?;
    let epsilon = match (a.eps, a.eps_over_gap) {
        (Some(e), _) => e,
        (None, Some(r)) => r * gap,
        (None, None) => return invalid("need --eps or --eps-over-gap"),
    };
    println!("epsilon = {epsilon:.6e} (normalized) = {:.6e} gap", epsilon / gap);
    if a.two_stage {
        let p = match cost::two_stage_plan(&m, epsilon, a.delta) {
            Ok(p) => p,
            Err(e) if e.to_string().contains("interior condition") => {
                let msg = e.to_string();
                run.json("two_stage.json", &json!({ "epsilon": epsilon, "delta": a.delta, "interior_condition_ok": false, "error": msg }))?;
                return Err(e.into());
            }
            Err(e) => return Err(e.into()),
        };
        run.json("two_stage.json", &p)?;
        println!("eps'_bal = {:.6e}, delta1 = {:.6e}, delta2 = {:.6e}", p.eps_prime_bal, p.delta1, p.delta2);
        println!("stage 1 cost {:.6e}, stage 2 cost {:.6e}, total {:.6e}", p.stage1_cost, p.stage2_cost, p.total_cost);
        println!("headline form {:.6e} (ratio {:.4})", p.headline_cost, p.headline_cost / p.total_cost);
        println!("interior condition ok: {}", p.interior_condition_ok);
        warn(&p.warnings);
        return Ok(());
    }
    let b = basis(&a.basis, a.eps_he)?;
    let exact = PriorEstimates::exact(&m, a.eps_prime)?;
    let priors = PriorEstimates::new(a.e0.unwrap_or(exact.tilde_e0), a.e1.unwrap_or(exact.tilde_e1), a.eps_prime)?;
    let plan = cost::gaussian_fqpe_plan(&m, &priors, epsilon, a.delta, b, a.eps_he)?;
    let qpe = cost::qpe_plan(m.ground_overlap(), epsilon, a.delta, cost::optimal_delta0())?;
    run.json("plan.json", &json!({ "priors": priors, "fqpe": plan, "qpe": qpe }))?;
    println!("filter order {}, eps_g {:.3e}", plan.filter_order.unwrap_or(0), plan.eps_g.unwrap_or(f64::NAN));
    println!("M_f = {}, M_QPE = {}", plan.m_f, plan.m_qpe);
    println!("relative cost {:.6e} (rounded {:.6e})", plan.relative_cost, plan.relative_cost_rounded);
    if let Some(bound) = plan.theorem_bound {
        println!("theorem bound {bound:.6e}, satisfied: {}", plan.bound_satisfied.map(|v| v.to_string()).unwrap_or_else(|| "n/a".into()));
    }
    warn(&plan.warnings);
    Ok(())
}

fn cmd_sweep_gaussian(a: &SweepGaussianArgs, run: &mut Run) -> CliResult<()> {
    let m = run.model(&a.model)?;
    gap_of(&m)?;
    let b = basis(&a.basis, a.eps_he)?;
    let grid = sweep::sweep_gaussian(&m, a.eps_over_gap, parse_range(&a.bias, "--bias")?, parse_range(&a.width, "--width")?, b, a.eps_he)?;
    run.write("landscape.csv", &grid.to_csv()?)?;
    run.json("landscape.json", &grid)?;
    match grid.minimum() {
        Some(c) => println!(
            "minimum relative cost {:.6e} at bias {} gap, width {} gap (N = {})",
            c.relative_cost.unwrap(),
            c.bias,
            c.width,
            c.order.unwrap_or(0)
        ),
        None => println!("WARN: no cell has a finite cost"),
    }
    let bad = grid.cells.iter().filter(|c| c.invalid.is_some()).count();
    if bad > 0 {
        println!("WARN: {bad} of {} cells have no cost", grid.cells.len());
    }
    if a.common.emit_svg {
        run.write("landscape.svg", &svg::heatmap(&grid, &format!("relative cost, eps = {:e} gap", a.eps_over_gap)))?;
    }
    Ok(())
}

fn cmd_sweep_krylov(a: &SweepKrylovArgs, run: &mut Run) -> CliResult<()> {
    let m = run.model(&a.model)?;
    gap_of(&m)?;
    let b = basis(&a.basis, a.eps_he)?;
    let ns: Vec<usize> = parse_list(&a.n_list, "--n-list")?;
    let lambdas: Vec<LambdaChoice> = a.lambda.split(',').map(LambdaChoice::parse).collect::<fqpe::Result<_>>()?;
    let rows = sweep::sweep_krylov(&m, b, &ns, &lambdas, a.eps_over_gap, a.threshold, a.eps_he)?;
    run.write("krylov_sweep.csv", &sweep::krylov_rows_to_csv(&rows)?)?;
    run.json("krylov_sweep.json", &rows)?;
    for r in &rows {
        let c = r.rel_cost.map(|c| format!("{c:.4e}")).unwrap_or_else(|| "rejected".into());
        println!("N {:>4}  lambda {:.3e}  E0_err {:.3e} gap  overlap {:.4e}  p_f {:.4e}  cost {c}", r.n, r.lambda, r.e0_err / m.gap(), r.overlap, r.p_f);
    }
    if a.common.emit_svg {
        let by = |pick: fn(&sweep::KrylovRow) -> Option<f64>| {
            lambdas
                .iter()
                .enumerate()
                .map(|(k, l)| Series {
                    name: match l {
                        LambdaChoice::Zero => "lambda = 0".into(),
                        LambdaChoice::Star => "lambda = N eps".into(),
                        LambdaChoice::Value(v) => format!("lambda = {v:e}"),
                    },
                    points: rows.iter().skip(k).step_by(lambdas.len()).map(|r| (r.n as f64, pick(r).unwrap_or(f64::NAN))).collect(),
                })
                .collect::<Vec<_>>()
        };
        let cost = LinePlot { title: "Krylov relative cost".into(), x_label: "N".into(), y_label: "relative cost".into(), log_y: true, series: by(|r| r.rel_cost) };
        let ov = LinePlot { title: "filtered overlap".into(), x_label: "N".into(), y_label: "|gamma_f0|^2".into(), log_y: true, series: by(|r| Some(r.overlap)) };
        run.write("krylov_cost.svg", &svg::lines(&cost))?;
        run.write("krylov_overlap.svg", &svg::lines(&ov))?;
    }
    Ok(())
}

fn cmd_worst_case(a: &WorstCaseArgs, run: &mut Run) -> CliResult<()> {
    let m = run.model(&a.model)?;
    gap_of(&m)?;
    let b = basis(&a.basis, a.eps_he)?;
    let eps: Vec<f64> = parse_list(&a.eps_over_gap, "--eps-over-gap")?;
    let ep = parse_range(&a.eps_prime, "--eps-prime")?.points();
    let (br, wr) = (parse_range(&a.bias, "--bias")?, parse_range(&a.width, "--width")?);
    let mut curves = Vec::new();
    for &r in &eps {
        let grid = sweep::sweep_gaussian(&m, r, br, wr, b, a.eps_he)?;
        curves.push(sweep::sweep_worst_case(&grid, &m, &ep)?);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(["eps_over_gap", "eps_prime", "worst_cost", "cells_in_box", "worst_bias", "worst_width"]).map_err(err)?;
    for c in &curves {
        for i in 0..c.eps_prime.len() {
            w.write_record([
                format!("{:e}", c.eps_over_gap),
                format!("{:e}", c.eps_prime[i]),
                format!("{:e}", c.worst_cost[i]),
                c.cells_in_box[i].to_string(),
                format!("{:e}", c.worst_cell[i].0),
                format!("{:e}", c.worst_cell[i].1),
            ])
            .map_err(err)?;
        }
        println!(
            "eps = {:e} gap: worst cost {:.4e} at eps' = 0, {:.4e} at eps' = {}",
            c.eps_over_gap,
            c.worst_cost[0],
            c.worst_cost[c.worst_cost.len() - 1],
            c.eps_prime[c.eps_prime.len() - 1]
        );
    }
    run.write("worst_case.csv", &csv_string(w)?)?;
    run.json("worst_case.json", &curves)?;
    if a.common.emit_svg {
        let plot = LinePlot {
            title: "worst-case relative cost".into(),
            x_label: "eps' (prior error / gap)".into(),
            y_label: "worst relative cost".into(),
            log_y: true,
            series: curves
                .iter()
                .map(|c| Series { name: format!("eps = {:e} gap", c.eps_over_gap), points: c.eps_prime.iter().copied().zip(c.worst_cost.iter().copied()).collect() })
                .collect(),
        };
        run.write("worst_case.svg", &svg::lines(&plot))?;
    }
    Ok(())
}

fn cmd_compare(a: &CompareArgs, run: &mut Run) -> CliResult<()> {
    let m = run.model(&a.model)?;
    gap_of(&m)?;
    let b = basis(&a.basis, a.eps_he)?;
    let c = sweep::filter_comparison(&m, b, a.n, a.eps_over_gap, a.threshold, a.eps_he)?;
    run.json("compare.json", &c)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Internal(e.to_string());
    let mut head = vec!["x".to_string()];
    head.extend(c.filters.iter().map(|f| f.name.clone()));
    w.write_record(&head).map_err(err)?;
    for (i, x) in c.grid.iter().enumerate() {
        let mut row = vec![format!("{x:e}")];
        row.extend(c.filters.iter().map(|f| format!("{:e}", f.curve[i])));
        w.write_record(&row).map_err(err)?;
    }
    run.write("compare.csv", &csv_string(w)?)?;
    println!("{}", energy_line("Krylov E0", c.krylov_ground_energy, &m));
    for f in &c.filters {
        let cost = f.rel_cost.map(|v| format!("{v:.4e}")).unwrap_or_else(|| "rejected".into());
        println!(
            "{:<16} |f(E0)|^2 {:.4e}  overlap {:.4e}  p_f {:.4e}  cost {cost}{}",
            f.name,
            f.report.f_at_e0_sq,
            f.report.overlap_f0_sq,
            f.report.p_f,
            f.sigma.map(|s| format!("  sigma {s:.4e}")).unwrap_or_default()
        );
    }
    if a.common.emit_svg {
        let named: Vec<(&str, &FilterSeries)> = c.filters.iter().map(|f| (f.name.as_str(), &f.series)).collect();
        run.write("compare.svg", &svg::lines(&curve_plot(&format!("filters at N = {}", a.n), &named)))?;
    }
    Ok(())
}

fn cmd_mc(a: &McArgs, run: &mut Run) -> CliResult<()> {
    let d0 = cost::optimal_delta0();
    let scenarios: Vec<(String, SpectralModel, flt::FilterReport, f64)> = match &a.model {
        Some(p) => {
            let m = run.model(p)?;
            let g = gap_of(&m)?;
            let pr = PriorEstimates::exact(&m, a.eps_prime)?;
            let eps_g = cost::gaussian_epsilon_g(a.eps_over_gap * g, g)?;
            let d = flt::design_gaussian_trig(pr.tilde_e0.clamp(-1.0, 1.0), pr.tilde_e0, pr.tilde_e1, pr.eps_prime, eps_g)?;
            let r = flt::filtered_state_report(&m, &d.series);
            vec![("model_gaussian".into(), m, r, a.delta)]
        }
        None => sweep::shipped_mc_scenarios()?.into_iter().map(|s| (s.name.to_string(), s.model, s.report, s.delta)).collect(),
    };
    let mut results = Vec::new();
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(["scenario", "trials", "m_f", "empirical", "formula", "z"]).map_err(err)?;
    for (k, (name, m, r, delta)) in scenarios.iter().enumerate() {
        let res = cost::mc_validate(m, r, *delta, d0, a.trials, a.common.seed.wrapping_add(k as u64))?;
        println!("{name}: M_f {} empirical {:.6} formula {:.6} z {:+.3}", res.m_f, res.empirical, res.formula, res.z);
        if res.z.abs() > 3.0 {
            println!("WARN: {name} deviates by {:.2} standard errors", res.z.abs());
        }
        w.write_record([name.clone(), res.trials.to_string(), res.m_f.to_string(), format!("{:e}", res.empirical), format!("{:e}", res.formula), format!("{:e}", res.z)])
            .map_err(err)?;
        results.push(json!({ "scenario": name, "delta": delta, "report": r, "result": res }));
    }
    run.write("mc.csv", &csv_string(w)?)?;
    run.json("mc.json", &json!({ "seed": a.common.seed, "delta0": d0, "scenarios": results }))?;
    Ok(())
}
