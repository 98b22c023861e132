//! Cross-validated experiment drivers.
//!
//! Every driver fans out independent cells (grid point x fold) to the rayon
//! pool. A cell's random stream is derived from the master seed, the
//! experiment id and the cell coordinates, so results do not depend on the
//! number of worker threads or on scheduling order.

use rand::seq::{index, SliceRandom};
use rayon::prelude::*;

use crate::dataset::{alpha_ratio, mrmr_rank, smote_replicate, stratified_kfold, FoldSplit, OmicsDataset};
use crate::decoding::{
    build_assignment, compute_firing_average, AssignmentVector, DecodeError, DecoderKind, FittedDecoders,
    LogisticModel, ResponseMatrix,
};
use crate::gsn::{FeatureLayout, GsnEncoder, LayoutSource};
use crate::seed::{derive_rng, SimRng};
use crate::spike_codec::encode_poisson;
use crate::wta_network::{collect_responses, init_network, train_epochs_with};

use super::config::{AlphaTarget, FeatureGroup, PipelineConfig, ZSource};
use super::metrics::{accuracy, f1_score, pearson, ConfusionMatrix};
use super::results::{BiasRow, ExperimentResult, ExperimentRow, POOLED_FOLD};
use super::{EvalError, Result};

/// Predictions of one decoder on one fold's test rows; `None` marks an abstention.
#[derive(Debug, Clone)]
pub struct DecoderPredictions {
    pub decoder: DecoderKind,
    pub pairs: Vec<(usize, Option<usize>)>,
}

/// Everything one (grid point, fold) cell produced.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub fold: usize,
    /// Class ratio of the training set after rebalancing.
    pub train_alpha: f64,
    pub assignment: AssignmentVector,
    pub predictions: Vec<DecoderPredictions>,
}

/// Pearson correlation between training-set and assignment class ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentSummary {
    /// `(training alpha, assignment alpha)` per cell.
    pub points: Vec<(f64, f64)>,
    pub pearson: f64,
}

fn folds_for(data: &OmicsDataset, cfg: &PipelineConfig, master: u64) -> Result<FoldSplit> {
    Ok(stratified_kfold(
        data,
        cfg.experiment.folds,
        &mut derive_rng(master, "folds", &[]),
    )?)
}

fn global_layout(data: &OmicsDataset, cfg: &PipelineConfig, master: u64) -> Result<Option<FeatureLayout>> {
    if cfg.gsn.layout_source != LayoutSource::Global {
        return Ok(None);
    }
    let encoder = GsnEncoder::fit(data, &cfg.gsn, &mut derive_rng(master, "layout", &[]))?;
    Ok(Some(encoder.layout))
}

/// Rebalance a training split toward `target`; folds already at or above
/// the target are returned unchanged.
fn rebalance(train: OmicsDataset, target: AlphaTarget, rng: &mut SimRng) -> Result<OmicsDataset> {
    match target {
        AlphaTarget::Ratio(t) if alpha_ratio(&train)?.alpha < t => Ok(smote_replicate(&train, t, rng)?),
        _ => Ok(train),
    }
}

fn decode_all(
    fitted: &FittedDecoders,
    decoders: &[DecoderKind],
    test: &ResponseMatrix,
) -> Result<Vec<DecoderPredictions>> {
    decoders
        .iter()
        .map(|&kind| {
            let pairs = test
                .rows()
                .zip(test.labels())
                .map(|(row, &truth)| {
                    let r = crate::spike_codec::ResponseVector { counts: row.to_vec() };
                    match fitted.decode(kind, &r) {
                        Ok(c) => Ok((truth, Some(c))),
                        Err(DecodeError::AllZeroResponse) => Ok((truth, None)),
                        Err(e) => Err(EvalError::from(e)),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(DecoderPredictions { decoder: kind, pairs })
        })
        .collect()
}

/// Train and score one fold: optionally keep the top `select_k` mRMR
/// features of the training split, rebalance it, fit the image layout,
/// train the network (and the online logistic readout), build the
/// assignment from training responses and decode the original test rows.
#[allow(clippy::too_many_arguments)]
pub fn run_cell(
    data: &OmicsDataset,
    split: &FoldSplit,
    fold: usize,
    target: AlphaTarget,
    layout: Option<&FeatureLayout>,
    select_k: Option<usize>,
    cfg: &PipelineConfig,
    rng: &mut SimRng,
) -> Result<CellOutcome> {
    let mut train = data.select_rows(&split.train_indices(fold))?;
    let mut test = data.select_rows(&split.test_indices(fold))?;
    if let Some(k) = select_k.filter(|&k| k < train.num_features()) {
        let ranking = mrmr_rank(&train, k)?;
        train = train.select_columns(&ranking)?;
        test = test.select_columns(&ranking)?;
    }
    if test.num_synthetic() != 0 {
        return Err(EvalError::InvalidConfig("replicated rows reached a test split".into()));
    }
    let encoder = match layout {
        Some(l) => GsnEncoder::with_layout(&train, l.clone(), &cfg.gsn)?,
        None => GsnEncoder::fit(&train, &cfg.gsn, rng)?,
    };
    let train = rebalance(train, target, rng)?;
    let train_alpha = alpha_ratio(&train)?.alpha;
    let train_images = encoder.encode_dataset(&train)?;
    let test_images = encoder.encode_dataset(&test)?;

    let mut state = init_network(&cfg.network, rng)?;
    let wants_logistic = cfg.experiment.decoders.contains(&DecoderKind::Logistic);
    let mut logistic = LogisticModel::new(
        cfg.network.output_neurons,
        cfg.training.logistic_learning_rate,
        cfg.training.logistic_standardize,
    );
    let labels = train.labels().to_vec();
    train_epochs_with(
        &mut state,
        &train_images,
        &cfg.encoder,
        cfg.training.epochs,
        rng,
        |s, i, r| {
            if wants_logistic {
                let spikes = encode_poisson(&train_images[i], &cfg.encoder, r)?;
                let response = s.respond(&spikes, r)?.response;
                logistic.update(&response.counts, labels[i])?;
            }
            Ok(())
        },
    )?;

    let train_r = collect_responses(&state, &train_images, train.labels(), &cfg.encoder, rng, false)?;
    let test_r = collect_responses(&state, &test_images, test.labels(), &cfg.encoder, rng, false)?;
    let fitted = FittedDecoders {
        assignment: build_assignment(&train_r)?,
        firing_average: compute_firing_average(&train_r)?,
        logistic: wants_logistic.then_some(logistic),
    };
    let predictions = decode_all(&fitted, &cfg.experiment.decoders, &test_r)?;
    Ok(CellOutcome {
        fold,
        train_alpha,
        assignment: fitted.assignment,
        predictions,
    })
}

/// Run every (grid point, fold) cell of an experiment.
fn run_grid(
    data: &OmicsDataset,
    experiment: &str,
    targets: &[AlphaTarget],
    select_k: Option<usize>,
    cfg: &PipelineConfig,
    master: u64,
) -> Result<Vec<Vec<CellOutcome>>> {
    cfg.validate()?;
    let split = folds_for(data, cfg, master)?;
    let layout = match select_k {
        // A shared layout cannot follow per-fold column choices.
        Some(k) if k < data.num_features() => None,
        _ => global_layout(data, cfg, master)?,
    };
    let component = format!("{experiment}/cell");
    let cells: Vec<(usize, usize)> = (0..targets.len())
        .flat_map(|a| (0..split.k).map(move |f| (a, f)))
        .collect();
    let outcomes = cells
        .par_iter()
        .map(|&(a, f)| {
            let mut rng = derive_rng(master, &component, &[a as u64, f as u64]);
            log::debug!("{experiment}: alpha {} fold {f}", targets[a]);
            run_cell(data, &split, f, targets[a], layout.as_ref(), select_k, cfg, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut grouped: Vec<Vec<CellOutcome>> = vec![Vec::new(); targets.len()];
    for ((a, _), outcome) in cells.into_iter().zip(outcomes) {
        grouped[a].push(outcome);
    }
    Ok(grouped)
}

/// `(truth, prediction)` for each scored sample.
type Pairs = Vec<(usize, Option<usize>)>;

fn score(pairs: &[(usize, Option<usize>)]) -> Result<(f64, f64, usize)> {
    let cm = ConfusionMatrix::from_predictions(pairs.iter().copied());
    let abstentions = pairs.iter().filter(|(_, p)| p.is_none()).count();
    Ok((f1_score(&cm), accuracy(&cm)?, abstentions))
}

/// Per-fold rows followed by pooled rows, decoder by decoder.
fn rows_for_point(
    experiment: &str,
    cells: &[CellOutcome],
    decoders: &[DecoderKind],
    master: u64,
) -> Result<Vec<ExperimentRow>> {
    let mut rows = Vec::new();
    for (d, &kind) in decoders.iter().enumerate() {
        let uses_z = kind.uses_assignment();
        let mut pooled = Vec::new();
        for cell in cells {
            let pairs = &cell.predictions[d].pairs;
            let (f1, acc, abstentions) = score(pairs)?;
            rows.push(ExperimentRow {
                experiment: experiment.to_string(),
                decoder: kind.name().to_string(),
                alpha: cell.train_alpha,
                fold: cell.fold as i64,
                seed: master,
                f1,
                accuracy: acc,
                assignment_alpha: uses_z.then(|| cell.assignment.alpha()),
                abstentions,
                mode_collapse: uses_z && cell.assignment.mode_collapsed(),
            });
            pooled.extend_from_slice(pairs);
        }
        let (f1, acc, abstentions) = score(&pooled)?;
        rows.push(ExperimentRow {
            experiment: experiment.to_string(),
            decoder: kind.name().to_string(),
            alpha: cells.iter().map(|c| c.train_alpha).sum::<f64>() / cells.len() as f64,
            fold: POOLED_FOLD,
            seed: master,
            f1,
            accuracy: acc,
            assignment_alpha: None,
            abstentions,
            mode_collapse: uses_z && cells.iter().any(|c| c.assignment.mode_collapsed()),
        });
    }
    Ok(rows)
}

fn sweep_rows(
    experiment: &str,
    grid: &[Vec<CellOutcome>],
    cfg: &PipelineConfig,
    master: u64,
) -> Result<ExperimentResult> {
    let mut result = ExperimentResult::default();
    for cells in grid {
        result
            .rows
            .extend(rows_for_point(experiment, cells, &cfg.experiment.decoders, master)?);
    }
    Ok(result)
}

/// The sweep's cells, one list per grid point, with their assignments and
/// raw predictions. Same seeds as [`run_imbalance_sweep`].
pub fn run_imbalance_cells(data: &OmicsDataset, cfg: &PipelineConfig, master: u64) -> Result<Vec<Vec<CellOutcome>>> {
    run_grid(data, "sweep", &cfg.experiment.alpha_grid, None, cfg, master)
}

/// Score every decoder over the class-ratio grid with k-fold cross-validation.
pub fn run_imbalance_sweep(data: &OmicsDataset, cfg: &PipelineConfig, master: u64) -> Result<ExperimentResult> {
    let grid = run_imbalance_cells(data, cfg, master)?;
    sweep_rows("sweep", &grid, cfg, master)
}

/// The sweep plus the correlation between training-set class ratio and the
/// class ratio of the neuron assignment.
pub fn run_assignment_analysis(
    data: &OmicsDataset,
    cfg: &PipelineConfig,
    master: u64,
) -> Result<(ExperimentResult, AssignmentSummary)> {
    if cfg.experiment.alpha_grid.len() < 2 {
        return Err(EvalError::ZeroVariance);
    }
    let grid = run_grid(data, "assign", &cfg.experiment.alpha_grid, None, cfg, master)?;
    let points: Vec<(f64, f64)> = grid
        .iter()
        .flatten()
        .map(|c| (c.train_alpha, c.assignment.alpha()))
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    let r = pearson(&x, &y)?;
    Ok((
        sweep_rows("assign", &grid, cfg, master)?,
        AssignmentSummary { points, pearson: r },
    ))
}

/// Untrained-network readout over random test subsets. The assignment comes
/// from the fold's training responses, or with [`ZSource::Test`] from the
/// very subset being scored.
pub fn run_bias_experiment(data: &OmicsDataset, cfg: &PipelineConfig, master: u64) -> Result<Vec<BiasRow>> {
    cfg.validate()?;
    let x = &cfg.experiment;
    if x.subset_sizes.is_empty() || x.subset_sizes.contains(&0) || x.bias_repetitions == 0 {
        return Err(EvalError::InvalidConfig(
            "bias experiment needs positive subset sizes and repetitions".into(),
        ));
    }
    let split = folds_for(data, cfg, master)?;
    let layout = global_layout(data, cfg, master)?;
    let per_fold = (0..split.k)
        .into_par_iter()
        .map(|fold| {
            let mut rng = derive_rng(master, "bias/cell", &[fold as u64]);
            bias_fold(data, &split, fold, layout.as_ref(), cfg, master, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<BiasRow> = per_fold.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.subset_size, r.fold));
    Ok(rows)
}

fn bias_fold(
    data: &OmicsDataset,
    split: &FoldSplit,
    fold: usize,
    layout: Option<&FeatureLayout>,
    cfg: &PipelineConfig,
    master: u64,
    rng: &mut SimRng,
) -> Result<Vec<BiasRow>> {
    let x = &cfg.experiment;
    let train = data.select_rows(&split.train_indices(fold))?;
    let test = data.select_rows(&split.test_indices(fold))?;
    let encoder = match layout {
        Some(l) => GsnEncoder::with_layout(&train, l.clone(), &cfg.gsn)?,
        None => GsnEncoder::fit(&train, &cfg.gsn, rng)?,
    };
    let state = init_network(&cfg.network, rng)?;
    let test_images = encoder.encode_dataset(&test)?;
    let test_r = collect_responses(&state, &test_images, test.labels(), &cfg.encoder, rng, true)?;
    let train_fit = match x.bias_z_source {
        ZSource::Train => {
            let images = encoder.encode_dataset(&train)?;
            let train_r = collect_responses(&state, &images, train.labels(), &cfg.encoder, rng, true)?;
            Some((build_assignment(&train_r)?, compute_firing_average(&train_r)?))
        }
        ZSource::Test => None,
    };

    let mut rows = Vec::new();
    for &size in &x.subset_sizes {
        if size > test.len() {
            return Err(EvalError::InvalidConfig(format!(
                "subset size {size} exceeds the {} test samples of fold {fold}",
                test.len()
            )));
        }
        let mut accuracies = Vec::with_capacity(x.bias_repetitions);
        for _ in 0..x.bias_repetitions {
            let subset = test_r.select(&index::sample(rng, test.len(), size).into_vec());
            let (assignment, firing_average) = match &train_fit {
                Some((z, f)) => (z.clone(), f.clone()),
                None => (build_assignment(&subset)?, compute_firing_average(&subset)?),
            };
            let fitted = FittedDecoders {
                assignment,
                firing_average,
                logistic: None,
            };
            let preds = decode_all(&fitted, &[x.bias_decoder], &subset)?;
            accuracies.push(score(&preds[0].pairs)?.1);
        }
        rows.push(BiasRow {
            decoder: x.bias_decoder.name().to_string(),
            subset_size: size,
            fold,
            seed: master,
            repetitions: accuracies.len(),
            accuracy: accuracies.iter().sum::<f64>() / accuracies.len() as f64,
            min_accuracy: accuracies.iter().copied().fold(f64::INFINITY, f64::min),
        });
    }
    Ok(rows)
}

/// `all`, `informative` and `noise` groups of a synthetic dataset whose
/// first `n_informative` columns carry the class signal.
pub fn synthetic_groups(data: &OmicsDataset, n_informative: usize) -> Vec<FeatureGroup> {
    let names = data.feature_names();
    let n = n_informative.min(names.len());
    let mut groups = vec![FeatureGroup {
        name: "all".into(),
        columns: names.to_vec(),
    }];
    if n > 0 {
        groups.push(FeatureGroup {
            name: "informative".into(),
            columns: names[..n].to_vec(),
        });
    }
    if n < names.len() {
        groups.push(FeatureGroup {
            name: "noise".into(),
            columns: names[n..].to_vec(),
        });
    }
    groups
}

fn resolve_groups<'a>(groups: &'a [FeatureGroup], requested: &[String]) -> Result<Vec<&'a FeatureGroup>> {
    if requested.is_empty() {
        return Ok(groups.iter().collect());
    }
    requested
        .iter()
        .map(|name| {
            groups
                .iter()
                .find(|g| &g.name == name)
                .ok_or_else(|| EvalError::UnknownFeatureGroup(name.clone()))
        })
        .collect()
}

/// Full pipeline on each feature group (experiment id `ablate/<group>`),
/// followed by the logistic k-sweep (`ksweep/<k>`). With a nonzero
/// `ablation_top_k` each fold first keeps that many mRMR-ranked columns of
/// the group, ranked on the fold's training split.
pub fn run_feature_ablation(
    data: &OmicsDataset,
    groups: &[FeatureGroup],
    cfg: &PipelineConfig,
    master: u64,
) -> Result<ExperimentResult> {
    let selected = resolve_groups(groups, &cfg.experiment.ablation_groups)?;
    let mut result = ExperimentResult::default();
    for group in selected {
        let columns = group
            .columns
            .iter()
            .map(|c| {
                data.feature_index(c).ok_or_else(|| EvalError::UnknownFeature {
                    group: group.name.clone(),
                    column: c.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let subset = data.select_columns(&columns)?;
        let id = format!("ablate/{}", group.name);
        let select_k = (cfg.experiment.ablation_top_k > 0).then_some(cfg.experiment.ablation_top_k);
        let grid = run_grid(&subset, &id, &[cfg.experiment.ablation_alpha], select_k, cfg, master)?;
        result.extend(sweep_rows(&id, &grid, cfg, master)?);
    }
    result.extend(run_logistic_ksweep(data, cfg, master)?);
    Ok(result)
}

fn standardized(d: &OmicsDataset, columns: &[usize], mean: &[f64], sd: &[f64]) -> Vec<Vec<f64>> {
    d.rows()
        .map(|r| {
            columns
                .iter()
                .enumerate()
                .map(|(i, &j)| (r[j] - mean[i]) / sd[i])
                .collect()
        })
        .collect()
}

fn column_moments(d: &OmicsDataset, columns: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let n = d.len() as f64;
    columns
        .iter()
        .map(|&j| {
            let col = d.column(j);
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            (mean, if var > 0.0 { var.sqrt() } else { 1.0 })
        })
        .unzip()
}

/// Logistic regression on the top-k mRMR features for k = 1..=k_max, with
/// features ranked and standardized on each fold's training split.
pub fn run_logistic_ksweep(data: &OmicsDataset, cfg: &PipelineConfig, master: u64) -> Result<ExperimentResult> {
    let x = &cfg.experiment;
    let k_max = x.ksweep_max_k.min(data.num_features());
    if k_max == 0 || x.ksweep_epochs == 0 {
        return Ok(ExperimentResult::default());
    }
    let split = folds_for(data, cfg, master)?;
    let per_fold = (0..split.k)
        .into_par_iter()
        .map(|fold| -> Result<(f64, Vec<Pairs>)> {
            let mut rng = derive_rng(master, "ksweep/cell", &[fold as u64]);
            let train = data.select_rows(&split.train_indices(fold))?;
            let test = data.select_rows(&split.test_indices(fold))?;
            let ranking = mrmr_rank(&train, k_max)?;
            let train = rebalance(train, x.ablation_alpha, &mut rng)?;
            let train_alpha = alpha_ratio(&train)?.alpha;
            let mut per_k = Vec::with_capacity(k_max);
            for k in 1..=k_max {
                let columns = &ranking[..k];
                let (mean, sd) = column_moments(&train, columns);
                let xs = standardized(&train, columns, &mean, &sd);
                let mut model = LogisticModel::new(k, x.ksweep_learning_rate, false);
                let mut order: Vec<usize> = (0..xs.len()).collect();
                for _ in 0..x.ksweep_epochs {
                    order.shuffle(&mut rng);
                    for &i in &order {
                        model.update_features(&xs[i], train.labels()[i])?;
                    }
                }
                let pairs = standardized(&test, columns, &mean, &sd)
                    .iter()
                    .zip(test.labels())
                    .map(|(row, &y)| Ok((y, Some(model.predict_features(row)?.1))))
                    .collect::<Result<Vec<_>>>()?;
                per_k.push(pairs);
            }
            Ok((train_alpha, per_k))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut result = ExperimentResult::default();
    for k in 1..=k_max {
        let id = format!("ksweep/{k}");
        let mut pooled = Vec::new();
        for (fold, (alpha, per_k)) in per_fold.iter().enumerate() {
            let (f1, acc, _) = score(&per_k[k - 1])?;
            result.rows.push(ksweep_row(&id, *alpha, fold as i64, master, f1, acc));
            pooled.extend_from_slice(&per_k[k - 1]);
        }
        let (f1, acc, _) = score(&pooled)?;
        let alpha = per_fold.iter().map(|(a, _)| a).sum::<f64>() / per_fold.len() as f64;
        result.rows.push(ksweep_row(&id, alpha, POOLED_FOLD, master, f1, acc));
    }
    Ok(result)
}

fn ksweep_row(id: &str, alpha: f64, fold: i64, seed: u64, f1: f64, accuracy: f64) -> ExperimentRow {
    ExperimentRow {
        experiment: id.to_string(),
        decoder: DecoderKind::Logistic.name().to_string(),
        alpha,
        fold,
        seed,
        f1,
        accuracy,
        assignment_alpha: None,
        abstentions: 0,
        mode_collapse: false,
    }
}
