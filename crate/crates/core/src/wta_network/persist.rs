//! Versioned text model files.
//!
//! ```text
//! spikedx-model v1
//! [config]
//! image_width = 176
//! ...
//! trained_epochs = 1
//! [matrix hidden.0 32x88]
//! <32 lines of 88 values>
//! ...
//! [matrix output 100x8192]
//! [matrix top_down 8192x100]      (only with top-down enabled)
//! ```
//!
//! Weights are written with nine significant digits, which reproduces every
//! `f32` weight exactly on load.

use std::fmt::Write as _;
use std::path::Path;

use super::{NetworkConfig, NetworkError, NetworkState, Result};

pub const MODEL_HEADER: &str = "spikedx-model v1";

fn config_pairs(cfg: &NetworkConfig) -> Vec<(&'static str, String)> {
    vec![
        ("image_width", cfg.image_width.to_string()),
        ("image_height", cfg.image_height.to_string()),
        ("tile_width", cfg.tile_width.to_string()),
        ("tile_height", cfg.tile_height.to_string()),
        ("hidden_per_tile", cfg.hidden_per_tile.to_string()),
        ("output_neurons", cfg.output_neurons.to_string()),
        ("num_classes", cfg.num_classes.to_string()),
        ("complement_inputs", cfg.complement_inputs.to_string()),
        ("learning_rate", cfg.learning_rate.to_string()),
        ("weight_min", cfg.weight_min.to_string()),
        ("weight_max", cfg.weight_max.to_string()),
        ("init_min", cfg.init_min.to_string()),
        ("init_max", cfg.init_max.to_string()),
        ("trigger_threshold", cfg.trigger_threshold.to_string()),
        ("baseline_potential", cfg.baseline_potential.to_string()),
        ("top_down_enabled", cfg.top_down_enabled.to_string()),
        ("top_down_gain", cfg.top_down_gain.to_string()),
        ("presentation_ms", cfg.presentation_ms.to_string()),
        ("dt_ms", cfg.dt_ms.to_string()),
    ]
}

fn set_config(cfg: &mut NetworkConfig, key: &str, value: &str) -> Result<()> {
    fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
        value
            .parse()
            .map_err(|_| NetworkError::Malformed(format!("bad value {value:?} for {key}")))
    }
    match key {
        "image_width" => cfg.image_width = parse(key, value)?,
        "image_height" => cfg.image_height = parse(key, value)?,
        "tile_width" => cfg.tile_width = parse(key, value)?,
        "tile_height" => cfg.tile_height = parse(key, value)?,
        "hidden_per_tile" => cfg.hidden_per_tile = parse(key, value)?,
        "output_neurons" => cfg.output_neurons = parse(key, value)?,
        "num_classes" => cfg.num_classes = parse(key, value)?,
        "complement_inputs" => cfg.complement_inputs = parse(key, value)?,
        "learning_rate" => cfg.learning_rate = parse(key, value)?,
        "weight_min" => cfg.weight_min = parse(key, value)?,
        "weight_max" => cfg.weight_max = parse(key, value)?,
        "init_min" => cfg.init_min = parse(key, value)?,
        "init_max" => cfg.init_max = parse(key, value)?,
        "trigger_threshold" => cfg.trigger_threshold = parse(key, value)?,
        "baseline_potential" => cfg.baseline_potential = parse(key, value)?,
        "top_down_enabled" => cfg.top_down_enabled = parse(key, value)?,
        "top_down_gain" => cfg.top_down_gain = parse(key, value)?,
        "presentation_ms" => cfg.presentation_ms = parse(key, value)?,
        "dt_ms" => cfg.dt_ms = parse(key, value)?,
        _ => return Err(NetworkError::Malformed(format!("unknown config key {key:?}"))),
    }
    Ok(())
}

fn write_matrix(out: &mut String, name: &str, rows: usize, cols: usize, values: &[f32]) {
    writeln!(out, "[matrix {name} {rows}x{cols}]").expect("string write");
    for row in values.chunks(cols) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.8e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
}

pub fn model_string(state: &NetworkState) -> String {
    let cfg = &state.config;
    let mut out = format!("{MODEL_HEADER}\n[config]\n");
    for (k, v) in config_pairs(cfg) {
        writeln!(out, "{k} = {v}").expect("string write");
    }
    writeln!(out, "trained_epochs = {}", state.trained_epochs).expect("string write");
    for (t, m) in state.hidden.iter().enumerate() {
        write_matrix(
            &mut out,
            &format!("hidden.{t}"),
            cfg.hidden_per_tile,
            cfg.tile_inputs(),
            m,
        );
    }
    write_matrix(
        &mut out,
        "output",
        cfg.output_neurons,
        cfg.total_hidden(),
        &state.output,
    );
    if let Some(td) = &state.top_down {
        write_matrix(&mut out, "top_down", cfg.total_hidden(), cfg.output_neurons, td);
    }
    out
}

pub fn save_model(state: &NetworkState, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, model_string(state))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<NetworkState> {
    parse_model(&std::fs::read_to_string(path)?)
}

pub fn parse_model(text: &str) -> Result<NetworkState> {
    let mut lines = text.lines().enumerate();
    let malformed = |line: usize, what: &str| NetworkError::Malformed(format!("line {}: {what}", line + 1));
    match lines.next() {
        Some((_, h)) if h.trim() == MODEL_HEADER => {}
        _ => return Err(NetworkError::Malformed(format!("expected header {MODEL_HEADER:?}"))),
    }
    match lines.next() {
        Some((_, l)) if l.trim() == "[config]" => {}
        _ => return Err(malformed(1, "expected [config]")),
    }

    let mut cfg = NetworkConfig::default();
    let mut trained_epochs = 0;
    let mut matrices: Vec<(String, usize, usize, Vec<f32>)> = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(spec) = line.strip_prefix("[matrix ").and_then(|s| s.strip_suffix(']')) {
            let (name, dims) = spec.split_once(' ').ok_or_else(|| malformed(i, "bad matrix header"))?;
            let (r, c) = dims.split_once('x').ok_or_else(|| malformed(i, "bad matrix dims"))?;
            let rows = r.parse().map_err(|_| malformed(i, "bad row count"))?;
            let cols = c.parse().map_err(|_| malformed(i, "bad column count"))?;
            matrices.push((name.to_string(), rows, cols, Vec::with_capacity(rows * cols)));
        } else if let Some((_, _, cols, values)) = matrices.last_mut() {
            let start = values.len();
            for tok in line.split_ascii_whitespace() {
                values.push(tok.parse().map_err(|_| malformed(i, "bad weight"))?);
            }
            if values.len() - start != *cols {
                return Err(malformed(i, "row length differs from the matrix header"));
            }
        } else {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| malformed(i, "expected key = value"))?;
            let (k, v) = (k.trim(), v.trim());
            if k == "trained_epochs" {
                trained_epochs = v.parse().map_err(|_| malformed(i, "bad trained_epochs"))?;
            } else {
                set_config(&mut cfg, k, v)?;
            }
        }
    }
    cfg.validate()?;

    let mut take = |name: &str, rows: usize, cols: usize| -> Result<Vec<f32>> {
        let pos = matrices
            .iter()
            .position(|(n, ..)| n == name)
            .ok_or_else(|| NetworkError::Malformed(format!("missing matrix {name}")))?;
        let (_, r, c, values) = matrices.remove(pos);
        if (r, c) != (rows, cols) || values.len() != rows * cols {
            return Err(NetworkError::Malformed(format!("matrix {name} has the wrong shape")));
        }
        Ok(values)
    };
    let hidden = (0..cfg.num_tiles())
        .map(|t| take(&format!("hidden.{t}"), cfg.hidden_per_tile, cfg.tile_inputs()))
        .collect::<Result<Vec<_>>>()?;
    let output = take("output", cfg.output_neurons, cfg.total_hidden())?;
    let top_down = if cfg.top_down_enabled {
        Some(take("top_down", cfg.total_hidden(), cfg.output_neurons)?)
    } else {
        None
    };
    if let Some((name, ..)) = matrices.first() {
        return Err(NetworkError::Malformed(format!("unexpected matrix {name}")));
    }
    NetworkState::from_parts(cfg, hidden, output, top_down, trained_epochs)
}
