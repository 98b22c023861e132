//! Acceptance criteria. Each one runs in turn and prints a single PASS or
//! FAIL line with what it measured; the process fails if any criterion does.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use anyhow::{ensure, Result};
use rand::Rng;
use spikedx_core::dataset::{gen_synthetic, stratified_kfold, OmicsDataset, SyntheticSpec};
use spikedx_core::decoding::{
    build_assignment, compute_firing_average, decode_class_average, decode_firing_average, decode_population_vector,
    decode_wta, DecodeError, DecoderKind, LogisticModel, ResponseMatrix,
};
use spikedx_core::evaluation::{
    f1_score, pearson, run_assignment_analysis, run_bias_experiment, run_feature_ablation, run_imbalance_cells,
    run_logistic_ksweep, spearman, synthetic_groups, AlphaTarget, ConfusionMatrix, PipelineConfig, ZSource,
    POOLED_FOLD,
};
use spikedx_core::gsn::{render_gsn, train_som, FeatureLayout, Glyph, GsnEncoder, GsnImage, ImageGeometry, SomConfig};
use spikedx_core::seed::{derive_rng, rng_from_seed};
use spikedx_core::spike_codec::{encode_poisson, EncoderConfig, ResponseVector};
use spikedx_core::wta_network::stdp_update;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

type Criterion = (&'static str, fn() -> Result<Outcome>, Option<Duration>);

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: [Criterion; 10] = [
        ("decoder oracle equivalence", decoder_oracle, secs(10)),
        ("infallible neurons", infallible_neurons, secs(300)),
        ("imbalance mode collapse", mode_collapse, secs(900)),
        ("assignment follows imbalance", assignment_correlation, None),
        ("poisson encoder statistics", encoder_statistics, secs(30)),
        ("stdp equilibrium", stdp_equilibrium, secs(60)),
        ("som sanity", som_sanity, secs(30)),
        ("rasterizer oracle", rasterizer_oracle, None),
        ("pipeline determinism", pipeline_determinism, None),
        ("feature ablation shape", ablation_shape, secs(120)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run));
        let elapsed = start.elapsed();
        let (mut pass, mut detail) = match result {
            Ok(Ok(o)) => (o.pass, o.detail),
            Ok(Err(e)) => (false, format!("error: {e:#}")),
            Err(_) => (false, "panicked".to_string()),
        };
        if let Some(limit) = limit {
            if elapsed > limit {
                pass = false;
                detail += &format!("; over the {}s budget", limit.as_secs());
            }
        }
        failed += usize::from(!pass);
        let status = if pass { "PASS" } else { "FAIL" };
        println!("{status} {:>2} {name}: {detail} [{:.1}s]", i + 1, elapsed.as_secs_f64());
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn abstain(r: Result<usize, DecodeError>) -> Result<Option<usize>> {
    match r {
        Ok(c) => Ok(Some(c)),
        Err(DecodeError::AllZeroResponse) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn decoder_oracle() -> Result<Outcome> {
    let mut rng = rng_from_seed(20_240);
    let (mut decisions, mut mismatches) = (0usize, 0usize);
    for _ in 0..1000 {
        let inst = oracle::random_instance(&mut rng);
        let m = ResponseMatrix::new(inst.neurons, inst.classes, inst.train.clone(), inst.labels.clone())?;
        let z = build_assignment(&m)?;
        let z_ref = oracle::assignment(&inst);
        decisions += 1;
        mismatches += usize::from(z.z != z_ref);
        let f = compute_firing_average(&m)?;
        let logistic = if inst.classes == 2 {
            let mut model = LogisticModel::new(inst.neurons, 0.05, false);
            for (x, &y) in inst.train.iter().zip(&inst.labels) {
                model.update(x, y)?;
            }
            Some((model, oracle::Logistic::fit(&inst.train, &inst.labels, 0.05)))
        } else {
            None
        };
        for p in &inst.probes {
            let r = ResponseVector { counts: p.clone() };
            let mut agree = vec![
                abstain(decode_wta(&r, &z))? == oracle::wta(p, &z_ref),
                abstain(decode_population_vector(&r, &z))? == oracle::population_vector(p, &z_ref, inst.classes),
                abstain(decode_class_average(&r, &z))? == oracle::class_average(p, &z_ref, inst.classes),
                decode_firing_average(&r, &z, &f)? == oracle::firing_average(p, &z_ref, inst.classes, &inst.train),
            ];
            if let Some((model, reference)) = &logistic {
                agree.push(model.predict(p)?.1 == reference.predict(p));
            }
            decisions += agree.len();
            mismatches += agree.iter().filter(|&&a| !a).count();
        }
    }
    outcome(
        mismatches == 0,
        format!("{decisions} decisions on 1000 instances, {mismatches} disagreements"),
    )
}

fn imbalanced(seed: u64) -> Result<OmicsDataset> {
    Ok(gen_synthetic(
        &SyntheticSpec::new(300, 20, 11, 2.0),
        &mut rng_from_seed(100 + seed),
    )?)
}

fn infallible_neurons() -> Result<Outcome> {
    let data = imbalanced(0)?;
    let mut cfg = PipelineConfig::preset("reduced").unwrap();
    cfg.network.output_neurons = 20;
    cfg.experiment.bias_z_source = ZSource::Test;

    // 4 folds x 25 repetitions of single-sample subsets
    cfg.experiment.subset_sizes = vec![1];
    cfg.experiment.bias_repetitions = 25;
    let single = run_bias_experiment(&data, &cfg, 1)?;
    let perfect: usize = single
        .iter()
        .filter(|r| r.min_accuracy == 1.0)
        .map(|r| r.repetitions)
        .sum();
    let total: usize = single.iter().map(|r| r.repetitions).sum();

    cfg.experiment.subset_sizes = vec![1, 2, 4, 8, 16];
    cfg.experiment.bias_repetitions = 10;
    let rows = run_bias_experiment(&data, &cfg, 2)?;
    let sizes: Vec<f64> = cfg.experiment.subset_sizes.iter().map(|&s| s as f64).collect();
    let means: Vec<f64> = cfg
        .experiment
        .subset_sizes
        .iter()
        .map(|&s| {
            let at: Vec<f64> = rows.iter().filter(|r| r.subset_size == s).map(|r| r.accuracy).collect();
            at.iter().sum::<f64>() / at.len() as f64
        })
        .collect();
    let rho = spearman(&sizes, &means)?;
    let shown: Vec<String> = means.iter().map(|m| format!("{m:.3}")).collect();
    outcome(
        perfect == 100 && total == 100 && rho <= -0.5,
        format!(
            "size 1 perfect in {perfect}/{total} repetitions; mean accuracy by size [{}], spearman {rho:.3}",
            shown.join(", ")
        ),
    )
}

fn pooled_f1(cells: &[spikedx_core::evaluation::CellOutcome], kind: DecoderKind) -> f64 {
    let mut cm = ConfusionMatrix::default();
    for cell in cells {
        let d = cell
            .predictions
            .iter()
            .find(|p| p.decoder == kind)
            .expect("decoder was run");
        for &(t, p) in &d.pairs {
            cm.record(t, p);
        }
    }
    f1_score(&cm)
}

fn mode_collapse() -> Result<Outcome> {
    let mut cfg = PipelineConfig::preset("reduced").unwrap();
    cfg.experiment.alpha_grid = vec![AlphaTarget::Native];
    let (mut wins, mut collapsed, mut broken) = (0, 0, 0);
    for seed in 0..10 {
        let data = imbalanced(seed)?;
        let native = spikedx_core::dataset::alpha_ratio(&data)?;
        ensure!(native.alpha <= 0.07, "native alpha {} above 0.07", native.alpha);
        let grid = run_imbalance_cells(&data, &cfg, seed)?;
        let cells = &grid[0];
        for cell in cells {
            let a = &cell.assignment;
            if a.class_counts[native.minority_class] != 0 {
                continue;
            }
            collapsed += 1;
            let fold_f1 = |kind| pooled_f1(std::slice::from_ref(cell), kind);
            let zero = fold_f1(DecoderKind::Wta) == 0.0 && fold_f1(DecoderKind::PopulationVector) == 0.0;
            if !(zero && a.mode_collapsed()) {
                broken += 1;
            }
        }
        if pooled_f1(cells, DecoderKind::ClassAverage) > pooled_f1(cells, DecoderKind::PopulationVector) {
            wins += 1;
        }
    }
    outcome(
        broken == 0 && wins >= 8,
        format!(
            "{collapsed} folds collapsed to the majority, {broken} with nonzero wta/pv F1 or no flag; \
             class average beat population vector in {wins}/10 runs"
        ),
    )
}

fn assignment_correlation() -> Result<Outcome> {
    let data = gen_synthetic(&SyntheticSpec::new(150, 10, 11, 2.0), &mut rng_from_seed(200))?;
    let mut cfg = PipelineConfig::preset("reduced").unwrap();
    cfg.experiment.alpha_grid = [0.066, 0.33, 0.66, 1.0].into_iter().map(AlphaTarget::Ratio).collect();
    cfg.experiment.folds = 4;
    let (_, summary) = run_assignment_analysis(&data, &cfg, 0)?;
    let (x, y): (Vec<f64>, Vec<f64>) = summary.points.iter().copied().unzip();
    let r = pearson(&x, &y)?;
    outcome(
        r >= 0.7 && summary.points.len() == 16,
        format!("pearson {r:.3} over {} cells", summary.points.len()),
    )
}

fn encoder_statistics() -> Result<Outcome> {
    let cfg = EncoderConfig::default();
    ensure!(
        cfg.rate_hz == 200.0 && cfg.duration_ms == 150.0 && cfg.dt_ms == 1.0,
        "unexpected encoder defaults"
    );
    let bits: Vec<bool> = (0..8).map(|i| i % 2 == 0).collect();
    let img = GsnImage::from_pixels(4, 2, bits.clone())?;
    let mut rng = rng_from_seed(77);
    let (mut white, mut black) = (0u64, 0u64);
    let trains = 10_000;
    for _ in 0..trains {
        let train = encode_poisson(&img, &cfg, &mut rng)?;
        for (c, &on) in bits.iter().enumerate() {
            let n = train.channel_count(c) as u64;
            if on {
                white += n;
            } else {
                black += n;
            }
        }
    }
    let white_px = bits.iter().filter(|&&b| b).count() as f64;
    let mean = white as f64 / (trains as f64 * white_px);
    outcome(
        (mean - 30.0).abs() <= 0.3 && black == 0,
        format!("white-pixel mean count {mean:.3}, black-pixel spikes {black}"),
    )
}

fn stdp_equilibrium() -> Result<Outcome> {
    const PIXELS: usize = 64;
    let mut pass = true;
    let mut shown = Vec::new();
    for (i, q) in [0.2f64, 0.5, 0.8].into_iter().enumerate() {
        let mut rng = rng_from_seed(500 + i as u64);
        let mut w = [0.0f32; PIXELS];
        let mut tail = 0.0;
        for step in 0..10_000 {
            let x: Vec<bool> = (0..PIXELS).map(|_| rng.random::<f64>() < q).collect();
            stdp_update(&mut w, &x, 0.01, (-5.0, 5.0));
            if step >= 5_000 {
                tail += w.iter().map(|&v| f64::from(v)).sum::<f64>() / PIXELS as f64;
            }
        }
        let mean = tail / 5_000.0;
        pass &= (mean - q.ln()).abs() <= 0.05;
        shown.push(format!("q {q}: {mean:.3} vs {:.3}", q.ln()));
    }
    outcome(pass, shown.join("; "))
}

fn som_sanity() -> Result<Outcome> {
    let mut runs = 0;
    let mut raised = 0;
    let mut check = |initial: f64, last: f64| {
        runs += 1;
        raised += usize::from(last > initial + 1e-12);
    };

    // the layout fits of the mode-collapse datasets
    let cfg = PipelineConfig::preset("reduced").unwrap();
    for seed in 0..10 {
        let data = imbalanced(seed)?;
        let split = stratified_kfold(&data, 4, &mut rng_from_seed(seed))?;
        for fold in 0..4 {
            let train = data.select_rows(&split.train_indices(fold))?;
            let enc = GsnEncoder::fit(
                &train,
                &cfg.gsn,
                &mut derive_rng(seed, "acceptance/som", &[fold as u64]),
            )?;
            let (a, b) = enc.som_errors.expect("a map was trained");
            check(a, b);
        }
    }

    let mut rng = rng_from_seed(4);
    let points: Vec<Vec<f64>> = (0..50)
        .map(|_| vec![rng.random_range(0.0..4.0), rng.random_range(-2.0..0.0)])
        .collect();
    let mean: Vec<f64> = (0..2)
        .map(|d| points.iter().map(|r| r[d]).sum::<f64>() / 50.0)
        .collect();
    let one = SomConfig {
        width: 1,
        height: 1,
        epochs: 200,
        ..SomConfig::default()
    };
    let t = train_som(&points, &one, &mut rng)?;
    check(t.initial_quantization_error, t.final_quantization_error);
    let mean_gap = (0..2).map(|d| (t.grid.node(0)[d] - mean[d]).abs()).fold(0.0, f64::max);

    let separation = 6.0;
    let mut rng = rng_from_seed(9);
    let mut points = Vec::new();
    for c in [-0.5, 0.5] {
        for _ in 0..40 {
            points.push(vec![
                c * separation + rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
            ]);
        }
    }
    let two = SomConfig {
        width: 2,
        height: 1,
        epochs: 100,
        ..SomConfig::default()
    };
    let t = train_som(&points, &two, &mut rng)?;
    check(t.initial_quantization_error, t.final_quantization_error);
    let centroid_gap = [0, 40]
        .iter()
        .map(|&s| {
            let c: Vec<f64> = (0..2)
                .map(|d| points[s..s + 40].iter().map(|r| r[d]).sum::<f64>() / 40.0)
                .collect();
            (0..2)
                .map(|i| {
                    t.grid
                        .node(i)
                        .iter()
                        .zip(&c)
                        .map(|(a, b)| (a - b).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);

    outcome(
        raised == 0 && mean_gap < 1e-2 && centroid_gap <= 0.1 * separation,
        format!(
            "error rose in {raised}/{runs} runs; 1x1 node {mean_gap:.2e} from the mean; \
             2x1 centroids within {centroid_gap:.3} (limit {:.1})",
            0.1 * separation
        ),
    )
}

/// Pixel-space centre of a grid cell: cells span the image minus the
/// margin, a single cell sits in the middle.
fn centre(g: usize, cells: usize, extent: usize, margin: f64) -> f64 {
    if cells == 1 {
        extent as f64 / 2.0
    } else {
        margin + g as f64 * (extent as f64 - 2.0 * margin) / (cells - 1) as f64
    }
}

fn rasterizer_oracle() -> Result<Outcome> {
    const W: usize = 40;
    const H: usize = 30;
    let mut rng = rng_from_seed(808);
    let (mut differing, mut periodic_breaks) = (0, 0);
    for _ in 0..200 {
        let cols = rng.random_range(1..6);
        let rows = rng.random_range(1..5);
        let cell = (rng.random_range(0..cols), rng.random_range(0..rows));
        let margin = rng.random_range(0.0..15.0);
        let size = rng.random_range(0.5..25.0);
        let rotation_deg = match rng.random_range(0..3) {
            0 => 0.0,
            1 => 90.0,
            _ => rng.random_range(0.0..180.0),
        };
        let layout = FeatureLayout::new(cols, rows, vec![cell], vec!["f".into()])?;
        let geometry = ImageGeometry {
            width: W,
            height: H,
            margin,
        };
        let img = render_gsn(&layout, &[Glyph { size, rotation_deg }], &geometry)?;
        let (cx, cy) = (centre(cell.0, cols, W, margin), centre(cell.1, rows, H, margin));
        if img.pixels() != &oracle::rasterize(W, H, &[(cx, cy, size, rotation_deg)])[..] {
            differing += 1;
        }
        for turns in 1..4 {
            let turned = Glyph {
                size,
                rotation_deg: rotation_deg + 90.0 * f64::from(turns),
            };
            if render_gsn(&layout, &[turned], &geometry)? != img {
                periodic_breaks += 1;
            }
        }
    }
    outcome(
        differing == 0 && periodic_breaks == 0,
        format!(
            "{differing}/200 glyphs differ from the reference; {periodic_breaks}/600 quarter turns changed the image"
        ),
    )
}

fn pipeline_determinism() -> Result<Outcome> {
    let tmp = tempfile::tempdir()?;
    let mut csvs = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        let out = Command::new(env!("CARGO_BIN_EXE_spikedx"))
            .args([
                "sweep",
                "--synthetic",
                "--seed",
                "9",
                "--folds",
                "2",
                "--alpha-grid",
                "native,0.5,1.0",
            ])
            .args([
                "--preset",
                "reduced",
                "--set",
                "synthetic.majority=60",
                "--set",
                "synthetic.minority=12",
            ])
            .arg("--out-dir")
            .arg(&dir)
            .env_remove("SPIKEDX_SEED")
            .output()?;
        ensure!(
            out.status.success(),
            "sweep failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        csvs.push(std::fs::read(dir.join("sweep.csv"))?);
    }
    outcome(
        csvs[0] == csvs[1] && !csvs[0].is_empty(),
        format!(
            "two sweeps wrote {} and {} bytes, identical: {}",
            csvs[0].len(),
            csvs[1].len(),
            csvs[0] == csvs[1]
        ),
    )
}

fn ablation_shape() -> Result<Outcome> {
    let spec = SyntheticSpec::new(80, 40, 20, 2.0).with_informative(5);
    let data = gen_synthetic(&spec, &mut rng_from_seed(300))?;
    let mut cfg = PipelineConfig::preset("reduced").unwrap();
    let sweep = run_logistic_ksweep(&data, &cfg, 0)?;
    let f1_at: Vec<f64> = (1..=cfg.experiment.ksweep_max_k)
        .map(|k| {
            let id = format!("ksweep/{k}");
            let row = sweep.rows.iter().find(|r| r.experiment == id && r.fold == POOLED_FOLD);
            row.map(|r| r.f1).unwrap_or(f64::NAN)
        })
        .collect();
    let best = f1_at.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let plateau = f1_at
        .iter()
        .position(|&f| f >= best - 0.02)
        .map(|i| i + 1)
        .unwrap_or(usize::MAX);

    cfg.experiment.ablation_top_k = plateau.min(data.num_features());
    cfg.experiment.decoders = vec![DecoderKind::ClassAverage];
    cfg.training.epochs = 3;
    cfg.experiment.ksweep_max_k = 0;
    let groups = synthetic_groups(&data, 5);
    let r = run_feature_ablation(&data, &groups, &cfg, 0)?;
    let group = |g: &str| {
        r.select(g, "class_average")
            .find(|row| row.fold == POOLED_FOLD)
            .map(|row| row.f1)
            .unwrap_or(f64::NAN)
    };
    let (all, noise) = (group("ablate/all"), group("ablate/noise"));
    outcome(
        plateau <= 5 && all - noise >= 0.3,
        format!(
            "pooled logistic F1 is within 0.02 of its best ({best:.3}) from k = {plateau}; with top {} features \
             all {all:.3} vs noise {noise:.3} (gap {:.3})",
            cfg.experiment.ablation_top_k,
            all - noise
        ),
    )
}
