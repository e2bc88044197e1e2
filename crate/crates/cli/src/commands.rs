//! Subcommand implementations.

use std::error::Error as StdError;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use adacsl::config::KeyValues;
use adacsl::data::{
    feature_information, hard_dataset, load_csv, model_a_profile, model_b_profile, reduce_features,
    running_example_profile, save_dataset, synth_generate, HardSpec, IngestConfig,
};
use adacsl::harness::{run_sweep, write_aggregate, write_report, write_selection, SweepConfig};
use adacsl::roc::{constraint_line, intersect, iso_loss_line, optimal_point, roc_curve, write_curves, write_lines, Line};
use adacsl::tree::{from_document, leaf_groups, score_all, to_document, ModelMetadata};
use adacsl::{
    deploy, evaluate as evaluate_labels, fit_adaptive as fit_adaptive_loop, static_threshold, AdaptiveConfig,
    BaselineKind, BudgetSpec, CostMatrix64, Dataset, Evaluation, TreeModel64, TreeParams, Utilization,
};

use super::{
    BudgetArgs, CostArgs, DataArgs, EvaluateArgs, FitAdaptiveArgs, FitArgs, IngestCheckArgs, OptionalBudgetArgs,
    ReduceArgs, RocArgs, SweepArgs, SynthArgs, SynthKind, TreeArgs, TreeKind,
};

pub type CliResult = Result<(), Box<dyn StdError>>;

fn read_text(path: &Path) -> Result<String, Box<dyn StdError>> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult {
    std::fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn csv_file(path: &Path, fill: impl FnOnce(&mut Vec<u8>) -> adacsl::Result<()>) -> CliResult {
    let mut buf = Vec::new();
    fill(&mut buf)?;
    write_bytes(path, &buf)
}

fn load_data(args: &DataArgs) -> Result<Dataset, Box<dyn StdError>> {
    load_data_from(&args.data, args.ingest.as_deref())
}

fn load_data_from(data: &Path, ingest: Option<&Path>) -> Result<Dataset, Box<dyn StdError>> {
    let config = match ingest {
        Some(p) => IngestConfig::load(p)?,
        None => IngestConfig::default(),
    };
    Ok(load_csv(data, &config)?.dataset)
}

fn cost_matrix(args: &CostArgs) -> Result<CostMatrix64, Box<dyn StdError>> {
    Ok(CostMatrix64::canonical(args.c_fn, args.c_fp)?)
}

fn tree_params(args: &TreeArgs) -> TreeParams<f64> {
    TreeParams {
        max_depth: args.max_depth,
        min_samples_leaf: args.min_samples_leaf,
        min_cost_reduction: args.min_cost_reduction,
        laplace: args.laplace,
    }
}

fn budget_over(data: &Dataset, budget: Option<usize>, fraction: Option<f64>) -> adacsl::Result<Option<BudgetSpec>> {
    let n = data.n_instances();
    match (budget, fraction) {
        (Some(limit), _) => BudgetSpec::new(limit, n).map(Some),
        (None, Some(f)) => BudgetSpec::from_positive_fraction(f, data.n_positive(), n).map(Some),
        (None, None) => Ok(None),
    }
}

fn required_budget(data: &Dataset, args: &BudgetArgs) -> adacsl::Result<BudgetSpec> {
    Ok(budget_over(data, args.budget, args.budget_frac)?.expect("clap requires one budget flag"))
}

fn optional_budget(data: &Dataset, args: &OptionalBudgetArgs) -> adacsl::Result<Option<BudgetSpec>> {
    budget_over(data, args.budget, args.budget_frac)
}

fn load_model(path: &Path) -> Result<TreeModel64, Box<dyn StdError>> {
    from_document(&read_text(path)?).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn check_features(model: &TreeModel64, data: &Dataset) -> CliResult {
    if model.feature_names != data.feature_names() {
        return Err(format!(
            "model features [{}] do not match data features [{}]",
            model.feature_names.join(", "),
            data.feature_names().join(", ")
        )
        .into());
    }
    Ok(())
}

fn undefined_or(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |x| x.to_string())
}

fn print_evaluation(eval: &Evaluation<f64>) {
    let c = eval.confusion;
    println!("n_positive: {}", c.predicted_positive());
    println!("tp: {}  fp: {}  tn: {}  fn: {}", c.tp, c.fp, c.tn, c.fn_);
    println!("cost: {}", eval.cost);
    println!("accuracy: {}", undefined_or(eval.metrics.accuracy));
    println!("precision: {}", undefined_or(eval.metrics.precision));
}

pub fn ingest_check(args: IngestCheckArgs) -> CliResult {
    let config = match &args.data.ingest {
        Some(p) => IngestConfig::load(p)?,
        None => IngestConfig::default(),
    };
    let out = load_csv(&args.data.data, &config)?;
    let d = &out.dataset;
    println!("instances: {}", d.n_instances());
    println!("positives: {}", d.n_positive());
    println!("features: {}", d.n_features());
    println!("dropped rows (missing label): {}", out.missing_labels);
    println!("skipped rows (malformed): {}", out.malformed_rows);
    for name in d.feature_names() {
        println!("  {name}");
    }
    if let Some(path) = &args.out {
        save_dataset(path, d)?;
    }
    Ok(())
}

pub fn fit(args: FitArgs) -> CliResult {
    let data = load_data(&args.data)?;
    let costs = cost_matrix(&args.costs)?;
    let kind = match args.kind {
        TreeKind::Plain => BaselineKind::PlainTree,
        TreeKind::Cost => BaselineKind::CostTree,
    };
    let model = adacsl::baselines::train_baseline(kind, &data, &costs, &tree_params(&args.tree))?.with_metadata(
        ModelMetadata {
            seed: args.seed.seed,
            iteration_index: 1,
        },
    );
    write_bytes(&args.out, to_document(&model)?.as_bytes())?;
    println!("leaves: {}  depth: {}", model.leaves().len(), model.depth());
    Ok(())
}

pub fn fit_adaptive(args: FitAdaptiveArgs) -> CliResult {
    let data = load_data(&args.data)?;
    let budget = required_budget(&data, &args.budget)?;
    let config = AdaptiveConfig {
        epsilon: args.epsilon,
        max_iterations: args.max_iterations,
        initial_costs: cost_matrix(&args.costs)?,
        hyperparams: tree_params(&args.tree),
    };
    let out = match fit_adaptive_loop(&data, &config, &budget, args.seed.seed) {
        Ok(out) => out,
        Err(adacsl::Error::NonConvergence(nc)) => {
            if let Some(path) = &args.trace {
                nc.trace.save(path)?;
            }
            return Err(adacsl::Error::NonConvergence(nc).into());
        }
        Err(e) => return Err(e.into()),
    };
    write_bytes(&args.out, to_document(&out.model)?.as_bytes())?;
    if let Some(path) = &args.trace {
        out.trace.save(path)?;
    }
    let last = out.trace.last().expect("a fit has at least one iteration");
    println!("budget: {} of {}", budget.limit, budget.basis_size);
    println!("iterations: {}", out.trace.len());
    println!("c10: {}  tau: {}  tau_d: {}", last.c10, last.tau, last.tau_d);
    println!("training positives: {}  training cost: {}", last.n_positive, last.train_cost);
    let increases = out.trace.tau_d_increases();
    if !increases.is_empty() {
        println!("tau_d increased at iterations {increases:?}");
    }
    Ok(())
}

pub fn evaluate(args: EvaluateArgs) -> CliResult {
    let model = load_model(&args.model)?;
    let data = load_data(&args.data)?;
    check_features(&model, &data)?;
    let costs = cost_matrix(&args.costs)?;
    let scores = score_all(&model, &data)?;
    let predicted = match optional_budget(&data, &args.budget)? {
        Some(budget) => {
            let utilization = if args.no_fill {
                Utilization::Threshold
            } else {
                Utilization::Full
            };
            println!("budget: {}", budget.limit);
            deploy(&model, &data, &budget, args.seed.seed, utilization)?.labels
        }
        None => {
            let tau = static_threshold(&model.train_costs)?;
            scores.iter().map(|&s| s >= tau).collect()
        }
    };
    let eval = evaluate_labels(data.labels(), &predicted, &costs)?;
    println!("instances: {}", data.n_instances());
    print_evaluation(&eval);
    if let Some(path) = &args.out {
        let mut text = String::from("index,score,label,prediction\n");
        for (i, (&s, (&y, &p))) in scores.iter().zip(data.labels().iter().zip(&predicted)).enumerate() {
            writeln!(text, "{i},{s},{},{}", u8::from(y), u8::from(p)).expect("writing to a string");
        }
        write_bytes(path, text.as_bytes())?;
    }
    Ok(())
}

fn series_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn roc(args: RocArgs) -> CliResult {
    let data = load_data(&args.data)?;
    let costs = cost_matrix(&args.costs)?;
    let budget = optional_budget(&data, &args.budget)?;
    let (n_pos, n_neg) = (data.n_positive(), data.n_negative());
    let mut curves = Vec::new();
    let mut lines: Vec<(String, Line<f64>, Option<f64>)> = Vec::new();
    for path in &args.model {
        let model = load_model(path)?;
        check_features(&model, &data)?;
        let name = series_name(path);
        let curve = roc_curve(&leaf_groups(&model, &data)?, data.labels())?;
        let best = optimal_point(&curve, &costs, None)?;
        println!("{name}: optimum ({}, {}) loss {}", best.point.fpr, best.point.tpr, best.loss);
        lines.push((format!("{name}:iso"), iso_loss_line(&costs, n_pos, n_neg, best.loss)?, Some(best.loss)));
        if let Some(b) = &budget {
            let p = intersect(&curve, &constraint_line(n_pos, n_neg, b)?)?;
            println!("{name}: budget line crossing ({}, {})", p.fpr, p.tpr);
            let best = optimal_point(&curve, &costs, Some(b))?;
            println!(
                "{name}: budgeted optimum ({}, {}) loss {}",
                best.point.fpr, best.point.tpr, best.loss
            );
            lines.push((
                format!("{name}:iso-budget"),
                iso_loss_line(&costs, n_pos, n_neg, best.loss)?,
                Some(best.loss),
            ));
        }
        curves.push((name, curve));
    }
    if let Some(b) = &budget {
        lines.push(("budget".into(), constraint_line(n_pos, n_neg, b)?, None));
    }
    let series: Vec<(&str, _)> = curves.iter().map(|(n, c)| (n.as_str(), c)).collect();
    csv_file(&args.curves, |buf| write_curves(buf, &series))?;
    if let Some(path) = &args.lines {
        let refs: Vec<(&str, Line<f64>, Option<f64>)> = lines.iter().map(|(n, l, x)| (n.as_str(), *l, *x)).collect();
        csv_file(path, |buf| write_lines(buf, &refs))?;
    }
    Ok(())
}

pub fn reduce(args: ReduceArgs) -> CliResult {
    let data = load_data(&args.data)?;
    let reduced = reduce_features(&data, args.keep, args.bins)?;
    save_dataset(&args.out, &reduced)?;
    if let Some(path) = &args.info {
        let mut text = String::from("feature,mutual_information,kept\n");
        for (name, mi) in feature_information(&data, args.bins)? {
            let kept = reduced.feature_names().contains(&name);
            writeln!(text, "{name},{mi},{kept}").expect("writing to a string");
        }
        write_bytes(path, text.as_bytes())?;
    }
    println!("kept {} of {} features", reduced.n_features(), data.n_features());
    for name in data.feature_names().iter().filter(|n| !reduced.feature_names().contains(n)) {
        println!("  dropped {name}");
    }
    Ok(())
}

fn relative_to(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

pub fn sweep(args: SweepArgs) -> CliResult {
    let kv = KeyValues::load(&args.config)?;
    let mut config = SweepConfig::from_key_values(&kv)?;
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    let base = args.config.parent().unwrap_or(Path::new("."));
    let data = match (&config.input.data, config.input.synthetic.as_deref()) {
        (Some(path), None) => {
            let ingest = config.input.ingest.as_ref().map(|p| relative_to(base, p));
            load_data_from(&relative_to(base, path), ingest.as_deref())?
        }
        (None, Some("hard")) => hard_dataset(&HardSpec::default(), config.input.synthetic_seed)?,
        (None, Some(other)) => return Err(format!("unknown synthetic data set '{other}' (known: hard)").into()),
        (Some(_), Some(_)) => return Err("config sets both 'data' and 'synthetic'".into()),
        (None, None) => return Err("config needs 'data' or 'synthetic'".into()),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        pool = pool.num_threads(jobs);
    }
    let report = pool.build()?.install(|| run_sweep(&data, &config))?;
    csv_file(&args.out, |buf| write_report(buf, &report.rows))?;
    if let Some(path) = &args.aggregate {
        csv_file(path, |buf| write_aggregate(buf, &report.aggregates))?;
    }
    if let Some(path) = &args.selection {
        csv_file(path, |buf| write_selection(buf, &report.selections))?;
    }
    for a in &report.aggregates {
        println!(
            "features {} budget {} {:<10} mean cost {:.2}{}",
            a.feature_fraction,
            a.budget_fraction,
            a.model.name(),
            a.mean_cost,
            a.p_value.map(|p| format!("  p = {p:.4}")).unwrap_or_default()
        );
    }
    Ok(())
}

pub fn synth(args: SynthArgs) -> CliResult {
    let seed = args.seed.seed;
    let data = match args.kind {
        SynthKind::RunningExample => synth_generate(&running_example_profile(), seed)?,
        SynthKind::ModelA => synth_generate(&model_a_profile(), seed)?,
        SynthKind::ModelB => synth_generate(&model_b_profile(), seed)?,
        SynthKind::Hard => hard_dataset(&HardSpec::default(), seed)?,
    };
    save_dataset(&args.out, &data)?;
    println!("instances: {}  positives: {}", data.n_instances(), data.n_positive());
    Ok(())
}
