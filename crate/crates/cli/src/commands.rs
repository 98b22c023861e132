//! Subcommand bodies: thin orchestration over the core library.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use serde_json::json;
use spikedx_core::dataset::{
    alpha_ratio, gen_synthetic, load_csv, mrmr_select, variance_filter, write_csv, CsvSchema, DatasetError,
    OmicsDataset,
};
use spikedx_core::decoding::{
    build_assignment, compute_firing_average, read_assignment_csv, write_assignment_csv, write_response_csv,
    DecodeError, FittedDecoders, LogisticModel,
};
use spikedx_core::evaluation::{
    accuracy, f1_score, run_assignment_analysis, run_bias_experiment, run_feature_ablation, run_imbalance_sweep,
    synthetic_groups, ConfusionMatrix, ExperimentResult, ExperimentRow, POOLED_FOLD,
};
use spikedx_core::gsn::{read_layout_csv, write_layout_csv, write_pbm, GsnEncoder};
use spikedx_core::seed::{derive_rng, derive_seed};
use spikedx_core::spike_codec::{encode_poisson, ResponseVector};
use spikedx_core::wta_network::{collect_responses, init_network, load_model, model_string, train_epochs_with};

use crate::config::{resolve, Override, RunConfig};
use crate::output::Outputs;
use crate::{BiasMode, CmdResult, Common, DataArgs, GridArgs, OrExit, EXIT_ENCODE, EXIT_EXPERIMENT, EXIT_SCHEMA};

fn int(v: usize) -> toml::Value {
    toml::Value::Integer(v as i64)
}

fn setup(
    common: &Common,
    flags: Vec<Override>,
    command: &'static str,
    fallback_config: Option<PathBuf>,
) -> CmdResult<(RunConfig, Outputs)> {
    if let Some(jobs) = common.jobs {
        // Fails only when a pool already exists, which is harmless here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let mut overrides = common
        .set
        .iter()
        .map(|s| Override::parse(s))
        .collect::<anyhow::Result<Vec<_>>>()
        .or_exit(EXIT_SCHEMA)?;
    overrides.extend(flags);
    let file = common.config.clone().or(fallback_config);
    let (cfg, preset) = resolve(common.preset.as_deref(), file.as_deref(), &overrides).or_exit(EXIT_SCHEMA)?;
    let out = Outputs::create(&common.out_dir, command, common.seed, preset, &cfg)?;
    Ok((cfg, out))
}

fn load_data(args: &DataArgs, cfg: &RunConfig, seed: u64, stream: &str, out: &mut Outputs) -> CmdResult<OmicsDataset> {
    match &args.data {
        Some(path) => {
            let schema = CsvSchema {
                num_classes: cfg.network.num_classes,
            };
            let data = load_csv(path, &schema)
                .map_err(|e| with_path(path, e))
                .or_exit(EXIT_SCHEMA)?;
            out.input(path)?;
            Ok(data)
        }
        None => {
            out.cell(stream, &[], derive_seed(seed, stream, &[]));
            gen_synthetic(&cfg.synthetic.spec(), &mut derive_rng(seed, stream, &[])).or_exit(EXIT_SCHEMA)
        }
    }
}

/// Prefix dataset errors with the file unless they already name it.
fn with_path(path: &Path, e: DatasetError) -> anyhow::Error {
    match e {
        DatasetError::MissingHeader { .. } => e.into(),
        _ => anyhow!("{}: {e}", path.display()),
    }
}

fn validate(cfg: &RunConfig) -> CmdResult<()> {
    cfg.pipeline().validate().or_exit(EXIT_SCHEMA)
}

/// File-name-safe version of a sample id.
fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn prepare(common: &Common, args: &DataArgs, top_k: Option<usize>, threshold: Option<f64>) -> CmdResult<()> {
    let mut flags = Vec::new();
    if let Some(k) = top_k {
        flags.push(Override::new("selection.top_k", int(k)));
    }
    if let Some(t) = threshold {
        flags.push(Override::new("selection.variance_threshold", toml::Value::Float(t)));
    }
    let (cfg, mut out) = setup(common, flags, "prepare", None)?;
    let data = load_data(args, &cfg, common.seed, "synthetic", &mut out)?;
    let filtered = variance_filter(&data, cfg.selection.variance_threshold).or_exit(EXIT_SCHEMA)?;
    log::info!(
        "{} of {} features pass the variance filter",
        filtered.num_features(),
        data.num_features()
    );
    let picks = mrmr_select(&filtered, cfg.selection.top_k).or_exit(EXIT_SCHEMA)?;
    let columns: Vec<usize> = picks.iter().map(|p| p.feature).collect();
    let selected = filtered.select_columns(&columns).or_exit(EXIT_SCHEMA)?;

    write_csv(&selected, out.path("dataset.csv"), false).or_exit(EXIT_SCHEMA)?;
    out.written("dataset.csv")?;
    let mut report = String::from("rank,feature,relevance,score\n");
    for (rank, p) in picks.iter().enumerate() {
        writeln!(
            report,
            "{},{},{},{}",
            rank + 1,
            filtered.feature_names()[p.feature],
            p.relevance,
            p.score
        )
        .expect("string write");
    }
    out.write("ranking.csv", report.as_bytes())?;
    let balance = alpha_ratio(&selected).or_exit(EXIT_SCHEMA)?;
    out.summarize("samples", json!(selected.len()));
    out.summarize("features_in", json!(data.num_features()));
    out.summarize("features_after_variance_filter", json!(filtered.num_features()));
    out.summarize("features_selected", json!(selected.num_features()));
    out.summarize("alpha", json!(balance.alpha));
    println!(
        "selected {} of {} features from {} samples (alpha {:.4}) -> {}",
        selected.num_features(),
        data.num_features(),
        selected.len(),
        balance.alpha,
        out.dir().display()
    );
    out.finish()?;
    Ok(())
}

pub fn encode(common: &Common, args: &DataArgs, layout: Option<&Path>, dump_spikes: bool) -> CmdResult<()> {
    let (cfg, mut out) = setup(common, Vec::new(), "encode", None)?;
    let data = load_data(args, &cfg, common.seed, "synthetic", &mut out)?;
    let encoder = match layout {
        Some(path) => {
            let som = &cfg.gsn.som;
            let l = read_layout_csv(path, som.width, som.height).or_exit(EXIT_ENCODE)?;
            out.input(path)?;
            GsnEncoder::with_layout(&data, l, &cfg.gsn).or_exit(EXIT_ENCODE)?
        }
        None => {
            out.cell("layout", &[], derive_seed(common.seed, "layout", &[]));
            GsnEncoder::fit(&data, &cfg.gsn, &mut derive_rng(common.seed, "layout", &[])).or_exit(EXIT_ENCODE)?
        }
    };
    let images = encoder.encode_dataset(&data).or_exit(EXIT_ENCODE)?;
    write_layout_csv(&encoder.layout, out.path("layout.csv")).or_exit(EXIT_ENCODE)?;
    out.written("layout.csv")?;
    std::fs::create_dir_all(out.path("images")).or_exit(EXIT_ENCODE)?;
    for (id, img) in data.sample_ids().iter().zip(&images) {
        let name = format!("images/{}.pbm", file_stem(id));
        write_pbm(img, out.path(&name)).or_exit(EXIT_ENCODE)?;
        out.written(&name)?;
    }
    if dump_spikes {
        std::fs::create_dir_all(out.path("spikes")).or_exit(EXIT_ENCODE)?;
        for (i, (id, img)) in data.sample_ids().iter().zip(&images).enumerate() {
            let mut rng = derive_rng(common.seed, "encode/spikes", &[i as u64]);
            let train = encode_poisson(img, &cfg.encoder, &mut rng).or_exit(EXIT_ENCODE)?;
            let name = format!("spikes/{}.csv", file_stem(id));
            train.write_dense_csv(out.path(&name)).or_exit(EXIT_ENCODE)?;
            out.written(&name)?;
        }
    }
    let white: usize = images.iter().map(|i| i.count_white()).sum();
    out.summarize("images", json!(images.len()));
    out.summarize("mean_white_pixels", json!(white as f64 / images.len().max(1) as f64));
    println!(
        "encoded {} samples as {}x{} images -> {}",
        images.len(),
        cfg.gsn.image_width,
        cfg.gsn.image_height,
        out.dir().display()
    );
    out.finish()?;
    Ok(())
}

pub fn train(common: &Common, args: &DataArgs, epochs: Option<usize>, allow_untrained: bool) -> CmdResult<()> {
    let flags = epochs
        .map(|e| vec![Override::new("training.epochs", int(e))])
        .unwrap_or_default();
    let (mut cfg, mut out) = setup(common, flags, "train", None)?;
    let epochs = cfg.training.epochs;
    if epochs == 0 {
        if !allow_untrained {
            eprintln!(
                "warning: refusing to train for 0 epochs. Responses of an untrained network carry no \
                 learned class structure; train for at least one epoch before collecting responses \
                 (pass --allow-untrained to override)."
            );
            return Err(anyhow!("training.epochs is 0")).or_exit(EXIT_SCHEMA);
        }
        log::warn!("collecting responses from an untrained network");
        cfg.training.epochs = 1;
        validate(&cfg)?;
        cfg.training.epochs = 0;
    } else {
        validate(&cfg)?;
    }
    let data = load_data(args, &cfg, common.seed, "synthetic", &mut out)?;
    let seed = common.seed;
    for stream in ["layout", "train/init", "train/epochs", "train/responses"] {
        out.cell(stream, &[], derive_seed(seed, stream, &[]));
    }
    let encoder = GsnEncoder::fit(&data, &cfg.gsn, &mut derive_rng(seed, "layout", &[])).or_exit(EXIT_ENCODE)?;
    let images = encoder.encode_dataset(&data).or_exit(EXIT_ENCODE)?;

    let mut state = init_network(&cfg.network, &mut derive_rng(seed, "train/init", &[])).or_exit(EXIT_SCHEMA)?;
    let mut logistic = LogisticModel::new(
        cfg.network.output_neurons,
        cfg.training.logistic_learning_rate,
        cfg.training.logistic_standardize,
    );
    let labels = data.labels().to_vec();
    train_epochs_with(
        &mut state,
        &images,
        &cfg.encoder,
        epochs,
        &mut derive_rng(seed, "train/epochs", &[]),
        |s, i, r| {
            let spikes = encode_poisson(&images[i], &cfg.encoder, r)?;
            let response = s.respond(&spikes, r)?.response;
            logistic.update(&response.counts, labels[i])?;
            Ok(())
        },
    )
    .or_exit(EXIT_EXPERIMENT)?;
    let responses = collect_responses(
        &state,
        &images,
        data.labels(),
        &cfg.encoder,
        &mut derive_rng(seed, "train/responses", &[]),
        allow_untrained,
    )
    .or_exit(EXIT_EXPERIMENT)?;
    let z = build_assignment(&responses).or_exit(EXIT_EXPERIMENT)?;
    let f = compute_firing_average(&responses).or_exit(EXIT_EXPERIMENT)?;

    out.write("model.txt", model_string(&state).as_bytes())?;
    write_layout_csv(&encoder.layout, out.path("layout.csv")).or_exit(EXIT_ENCODE)?;
    out.written("layout.csv")?;
    write_assignment_csv(&z, &f, out.path("assignment.csv")).or_exit(EXIT_EXPERIMENT)?;
    out.written("assignment.csv")?;
    write_response_csv(&responses, out.path("responses.csv")).or_exit(EXIT_EXPERIMENT)?;
    out.written("responses.csv")?;
    let readout = serde_json::to_string_pretty(&logistic).map_err(anyhow::Error::from)? + "\n";
    out.write("logistic.json", readout.as_bytes())?;
    write_csv(&data, out.path("dataset.csv"), false).or_exit(EXIT_SCHEMA)?;
    out.written("dataset.csv")?;

    out.summarize("trained_epochs", json!(state.trained_epochs));
    out.summarize("assignment_alpha", json!(z.alpha()));
    out.summarize("mode_collapse", json!(z.mode_collapsed()));
    println!(
        "trained {} epochs on {} samples; assignment alpha {:.4}{} -> {}",
        state.trained_epochs,
        data.len(),
        z.alpha(),
        if z.mode_collapsed() { " (mode collapse)" } else { "" },
        out.dir().display()
    );
    out.finish()?;
    Ok(())
}

pub fn eval(common: &Common, args: &DataArgs, model_dir: &Path, allow_untrained: bool) -> CmdResult<()> {
    let saved = model_dir.join("config.toml");
    let fallback = saved.exists().then_some(saved);
    let (cfg, mut out) = setup(common, Vec::new(), "eval", fallback)?;
    let state = load_model(model_dir.join("model.txt")).or_exit(EXIT_SCHEMA)?;
    let schema = CsvSchema {
        num_classes: state.config.num_classes,
    };
    let train_path = model_dir.join("dataset.csv");
    let train = load_csv(&train_path, &schema)
        .map_err(|e| with_path(&train_path, e))
        .or_exit(EXIT_SCHEMA)?;
    let som = &cfg.gsn.som;
    let layout = read_layout_csv(model_dir.join("layout.csv"), som.width, som.height).or_exit(EXIT_SCHEMA)?;
    let (assignment, firing_average) =
        read_assignment_csv(model_dir.join("assignment.csv"), state.config.num_classes).or_exit(EXIT_SCHEMA)?;
    let logistic_path = model_dir.join("logistic.json");
    let logistic: Option<LogisticModel> = if logistic_path.exists() {
        let text = std::fs::read_to_string(&logistic_path).map_err(anyhow::Error::from)?;
        Some(serde_json::from_str(&text).or_exit(EXIT_SCHEMA)?)
    } else {
        None
    };
    for name in ["model.txt", "dataset.csv", "layout.csv", "assignment.csv"] {
        out.input(&model_dir.join(name))?;
    }

    let test = load_data(args, &cfg, common.seed, "synthetic/eval", &mut out)?;
    let encoder = GsnEncoder::with_layout(&train, layout, &cfg.gsn).or_exit(EXIT_ENCODE)?;
    let images = encoder.encode_dataset(&test).or_exit(EXIT_ENCODE)?;
    out.cell("eval/responses", &[], derive_seed(common.seed, "eval/responses", &[]));
    let responses = collect_responses(
        &state,
        &images,
        test.labels(),
        &cfg.encoder,
        &mut derive_rng(common.seed, "eval/responses", &[]),
        allow_untrained,
    )
    .or_exit(EXIT_EXPERIMENT)?;
    let decoders: Vec<_> = cfg
        .experiment
        .decoders
        .iter()
        .copied()
        .filter(|d| logistic.is_some() || d.uses_assignment())
        .collect();
    let fitted = FittedDecoders {
        assignment,
        firing_average,
        logistic,
    };

    let mut table = String::from("sample_id,label");
    for d in &decoders {
        table.push(',');
        table.push_str(d.name());
    }
    table.push('\n');
    let mut per_decoder: Vec<Vec<(usize, Option<usize>)>> = vec![Vec::new(); decoders.len()];
    for (i, (row, &truth)) in responses.rows().zip(responses.labels()).enumerate() {
        let r = ResponseVector { counts: row.to_vec() };
        table.push_str(&format!("{},{truth}", test.sample_ids()[i]));
        for (d, &kind) in decoders.iter().enumerate() {
            let pred = match fitted.decode(kind, &r) {
                Ok(c) => Some(c),
                Err(DecodeError::AllZeroResponse) => None,
                Err(e) => return Err(e).or_exit(EXIT_EXPERIMENT),
            };
            per_decoder[d].push((truth, pred));
            table.push(',');
            if let Some(c) = pred {
                table.push_str(&c.to_string());
            }
        }
        table.push('\n');
    }
    out.write("predictions.csv", table.as_bytes())?;
    write_response_csv(&responses, out.path("responses.csv")).or_exit(EXIT_EXPERIMENT)?;
    out.written("responses.csv")?;

    let train_alpha = alpha_ratio(&train).or_exit(EXIT_SCHEMA)?.alpha;
    let mut result = ExperimentResult::default();
    for (&kind, pairs) in decoders.iter().zip(&per_decoder) {
        let cm = ConfusionMatrix::from_predictions(pairs.iter().copied());
        let uses_z = kind.uses_assignment();
        result.rows.push(ExperimentRow {
            experiment: "eval".into(),
            decoder: kind.name().into(),
            alpha: train_alpha,
            fold: POOLED_FOLD,
            seed: common.seed,
            f1: f1_score(&cm),
            accuracy: accuracy(&cm).or_exit(EXIT_EXPERIMENT)?,
            assignment_alpha: uses_z.then(|| fitted.assignment.alpha()),
            abstentions: pairs.iter().filter(|(_, p)| p.is_none()).count(),
            mode_collapse: uses_z && fitted.assignment.mode_collapsed(),
        });
    }
    out.write("eval.csv", result.to_csv_string().as_bytes())?;
    print_pooled(&result);
    out.finish()?;
    Ok(())
}

fn print_pooled(result: &ExperimentResult) {
    println!(
        "{:<18} {:<18} {:>8} {:>8} {:>8}",
        "experiment", "decoder", "alpha", "f1", "accuracy"
    );
    for r in result.rows.iter().filter(|r| r.fold == POOLED_FOLD) {
        println!(
            "{:<18} {:<18} {:>8.4} {:>8.4} {:>8.4}",
            r.experiment, r.decoder, r.alpha, r.f1, r.accuracy
        );
    }
}

fn grid_flags(grid: &GridArgs) -> CmdResult<Vec<Override>> {
    let mut flags = Vec::new();
    if let Some(alphas) = &grid.alpha_grid {
        let values = alphas
            .iter()
            .map(|a| {
                let a = a.trim();
                if a == "native" {
                    Ok(toml::Value::String(a.into()))
                } else {
                    a.parse::<f64>()
                        .map(toml::Value::Float)
                        .map_err(|_| anyhow!("--alpha-grid: {a:?} is neither `native` nor a number"))
                }
            })
            .collect::<anyhow::Result<Vec<_>>>()
            .or_exit(EXIT_SCHEMA)?;
        flags.push(Override::new("experiment.alpha_grid", toml::Value::Array(values)));
    }
    if let Some(f) = grid.folds {
        flags.push(Override::new("experiment.folds", int(f)));
    }
    if let Some(e) = grid.epochs {
        flags.push(Override::new("training.epochs", int(e)));
    }
    if let Some(d) = &grid.decoders {
        let values = d.iter().map(|s| toml::Value::String(s.trim().into())).collect();
        flags.push(Override::new("experiment.decoders", toml::Value::Array(values)));
    }
    Ok(flags)
}

fn log_grid_cells(out: &mut Outputs, seed: u64, experiment: &str, points: usize, folds: usize) {
    let component = format!("{experiment}/cell");
    for a in 0..points as u64 {
        for f in 0..folds as u64 {
            out.cell(experiment, &[a, f], derive_seed(seed, &component, &[a, f]));
        }
    }
}

/// `sweep`, or `assign` when `assignment` is set.
pub fn sweep(common: &Common, args: &DataArgs, grid: &GridArgs, assignment: bool) -> CmdResult<()> {
    let command = if assignment { "assign" } else { "sweep" };
    let (cfg, mut out) = setup(common, grid_flags(grid)?, command, None)?;
    validate(&cfg)?;
    let data = load_data(args, &cfg, common.seed, "synthetic", &mut out)?;
    let pipeline = cfg.pipeline();
    log_grid_cells(
        &mut out,
        common.seed,
        command,
        cfg.experiment.alpha_grid.len(),
        cfg.experiment.folds,
    );
    let result = if assignment {
        let (result, summary) = run_assignment_analysis(&data, &pipeline, common.seed).or_exit(EXIT_EXPERIMENT)?;
        let mut points = String::from("train_alpha,assignment_alpha\n");
        for (a, z) in &summary.points {
            writeln!(points, "{a},{z}").expect("string write");
        }
        out.write("assignment_points.csv", points.as_bytes())?;
        out.summarize("pearson", json!(summary.pearson));
        println!("pearson(train alpha, assignment alpha) = {:.4}", summary.pearson);
        result
    } else {
        run_imbalance_sweep(&data, &pipeline, common.seed).or_exit(EXIT_EXPERIMENT)?
    };
    out.write(&format!("{command}.csv"), result.to_csv_string().as_bytes())?;
    out.summarize("rows", json!(result.rows.len()));
    print_pooled(&result);
    out.finish()?;
    Ok(())
}

pub fn bias(
    common: &Common,
    args: &DataArgs,
    subset_sizes: Option<Vec<usize>>,
    folds: Option<usize>,
    repetitions: Option<usize>,
    mode: Option<BiasMode>,
) -> CmdResult<()> {
    let mut flags = Vec::new();
    if let Some(sizes) = subset_sizes {
        flags.push(Override::new(
            "experiment.subset_sizes",
            toml::Value::Array(sizes.into_iter().map(int).collect()),
        ));
    }
    if let Some(f) = folds {
        flags.push(Override::new("experiment.folds", int(f)));
    }
    if let Some(r) = repetitions {
        flags.push(Override::new("experiment.bias_repetitions", int(r)));
    }
    if let Some(m) = mode {
        let source = match m {
            BiasMode::TrainSet => "train",
            BiasMode::TestSet => "test",
        };
        flags.push(Override::new(
            "experiment.bias_z_source",
            toml::Value::String(source.into()),
        ));
    }
    let (cfg, mut out) = setup(common, flags, "bias", None)?;
    validate(&cfg)?;
    let data = load_data(args, &cfg, common.seed, "synthetic", &mut out)?;
    for f in 0..cfg.experiment.folds as u64 {
        out.cell("bias", &[f], derive_seed(common.seed, "bias/cell", &[f]));
    }
    let rows = run_bias_experiment(&data, &cfg.pipeline(), common.seed).or_exit(EXIT_EXPERIMENT)?;
    out.write("bias.csv", spikedx_core::evaluation::bias_csv_string(&rows).as_bytes())?;
    println!("{:>6} {:>10} {:>10}", "size", "accuracy", "min");
    let mut summary = Vec::new();
    for &size in &cfg.experiment.subset_sizes {
        let at: Vec<_> = rows.iter().filter(|r| r.subset_size == size).collect();
        let mean = at.iter().map(|r| r.accuracy).sum::<f64>() / at.len().max(1) as f64;
        let min = at.iter().map(|r| r.min_accuracy).fold(f64::INFINITY, f64::min);
        println!("{size:>6} {mean:>10.4} {min:>10.4}");
        summary.push(json!({ "subset_size": size, "mean_accuracy": mean, "min_accuracy": min }));
    }
    out.summarize("by_subset_size", json!(summary));
    out.finish()?;
    Ok(())
}

pub fn ablate(
    common: &Common,
    args: &DataArgs,
    folds: Option<usize>,
    epochs: Option<usize>,
    groups: Option<Vec<String>>,
    informative: Option<usize>,
    ablation_top_k: Option<usize>,
) -> CmdResult<()> {
    let mut flags = Vec::new();
    if let Some(f) = folds {
        flags.push(Override::new("experiment.folds", int(f)));
    }
    if let Some(e) = epochs {
        flags.push(Override::new("training.epochs", int(e)));
    }
    if let Some(g) = groups {
        let values = g.into_iter().map(toml::Value::String).collect();
        flags.push(Override::new("experiment.ablation_groups", toml::Value::Array(values)));
    }
    if let Some(k) = ablation_top_k {
        flags.push(Override::new("experiment.ablation_top_k", int(k)));
    }
    let (cfg, mut out) = setup(common, flags, "ablate", None)?;
    validate(&cfg)?;
    let data = load_data(args, &cfg, common.seed, "synthetic", &mut out)?;
    let groups = if !cfg.experiment.feature_groups.is_empty() {
        cfg.experiment.feature_groups.clone()
    } else {
        let n = informative
            .or(args.synthetic.then(|| cfg.synthetic.informative_columns()))
            .ok_or_else(|| anyhow!("no feature groups: define [[experiment.feature_groups]] or pass --informative"))
            .or_exit(EXIT_SCHEMA)?;
        synthetic_groups(&data, n)
    };
    let requested = &cfg.experiment.ablation_groups;
    for g in groups
        .iter()
        .filter(|g| requested.is_empty() || requested.contains(&g.name))
    {
        log_grid_cells(
            &mut out,
            common.seed,
            &format!("ablate/{}", g.name),
            1,
            cfg.experiment.folds,
        );
    }
    for f in 0..cfg.experiment.folds as u64 {
        out.cell("ksweep", &[f], derive_seed(common.seed, "ksweep/cell", &[f]));
    }
    let result = run_feature_ablation(&data, &groups, &cfg.pipeline(), common.seed).or_exit(EXIT_EXPERIMENT)?;
    out.write("ablate.csv", result.to_csv_string().as_bytes())?;
    out.summarize("rows", json!(result.rows.len()));
    print_pooled(&result);
    out.finish()?;
    Ok(())
}
