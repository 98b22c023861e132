//! Brute-force references written straight from the defining formulas.
//! Shared by the core property tests and the acceptance suite, so they must
//! not call into the code they check.

#![allow(dead_code)]

use rand::Rng;

/// Random decoder instance: training responses with labels plus probes.
#[derive(Debug, Clone)]
pub struct Instance {
    pub neurons: usize,
    pub classes: usize,
    pub train: Vec<Vec<u32>>,
    pub labels: Vec<usize>,
    pub probes: Vec<Vec<u32>>,
}

/// `N <= 10`, `C <= 3`, counts `<= 20`. Every class occurs in training.
/// Small count ceilings are drawn often so that ties are common.
pub fn random_instance<R: Rng>(rng: &mut R) -> Instance {
    let neurons = rng.random_range(1..=10);
    let classes = rng.random_range(2..=3);
    let ceiling = *[1u32, 2, 3, 20].get(rng.random_range(0..4)).unwrap();
    let stimuli = rng.random_range(classes..=12);
    let mut labels: Vec<usize> = (0..stimuli).map(|_| rng.random_range(0..classes)).collect();
    for c in 0..classes {
        labels[c] = c;
    }
    let row = |rng: &mut R| -> Vec<u32> { (0..neurons).map(|_| rng.random_range(0..=ceiling)).collect() };
    let train = (0..stimuli).map(|_| row(rng)).collect();
    let probes = (0..8).map(|_| row(rng)).collect();
    Instance {
        neurons,
        classes,
        train,
        labels,
        probes,
    }
}

/// First index whose score equals the maximum.
fn first_max<T: PartialOrd + Copy>(scores: &[T]) -> usize {
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    best
}

/// `z_j = argmax_c sum of neuron j's counts over class-c stimuli`.
pub fn assignment(inst: &Instance) -> Vec<usize> {
    (0..inst.neurons)
        .map(|j| {
            let per_class: Vec<u64> = (0..inst.classes)
                .map(|c| {
                    inst.train
                        .iter()
                        .zip(&inst.labels)
                        .filter(|(_, &l)| l == c)
                        .map(|(r, _)| r[j] as u64)
                        .sum()
                })
                .collect();
            first_max(&per_class)
        })
        .collect()
}

fn silent(r: &[u32]) -> bool {
    r.iter().all(|&c| c == 0)
}

pub fn wta(r: &[u32], z: &[usize]) -> Option<usize> {
    if silent(r) {
        return None;
    }
    Some(z[first_max(r)])
}

pub fn population_vector(r: &[u32], z: &[usize], classes: usize) -> Option<usize> {
    if silent(r) {
        return None;
    }
    let scores: Vec<u64> = (0..classes)
        .map(|c| (0..r.len()).filter(|&j| z[j] == c).map(|j| r[j] as u64).sum())
        .collect();
    Some(first_max(&scores))
}

/// Mean response per assigned neuron, compared as exact fractions. Classes
/// without neurons never win.
pub fn class_average(r: &[u32], z: &[usize], classes: usize) -> Option<usize> {
    if silent(r) {
        return None;
    }
    let frac = |c: usize| -> (u64, u64) {
        let members: Vec<usize> = (0..r.len()).filter(|&j| z[j] == c).collect();
        (members.iter().map(|&j| r[j] as u64).sum(), members.len() as u64)
    };
    let mut best: Option<(usize, (u64, u64))> = None;
    for c in 0..classes {
        let (s, k) = frac(c);
        if k == 0 {
            continue;
        }
        // s/k > bs/bk  <=>  s*bk > bs*k
        if best.is_none_or(|(_, (bs, bk))| s * bk > bs * k) {
            best = Some((c, (s, k)));
        }
    }
    best.map(|(c, _)| c)
}

/// `sum_{j in Z_c} (r_j - F_j)` with `F` the mean training response, scaled
/// by the stimulus count so every score is an integer.
pub fn firing_average(r: &[u32], z: &[usize], classes: usize, train: &[Vec<u32>]) -> usize {
    let s = train.len() as i64;
    let totals: Vec<i64> = (0..r.len()).map(|j| train.iter().map(|t| t[j] as i64).sum()).collect();
    let scores: Vec<i64> = (0..classes)
        .map(|c| {
            (0..r.len())
                .filter(|&j| z[j] == c)
                .map(|j| s * r[j] as i64 - totals[j])
                .sum()
        })
        .collect();
    first_max(&scores)
}

/// Online logistic regression: one pass, `w += eta (y - p) x`, predict 1 iff
/// the logit is non-negative.
pub struct Logistic {
    pub w: Vec<f64>,
    pub b: f64,
}

impl Logistic {
    pub fn fit(train: &[Vec<u32>], labels: &[usize], eta: f64) -> Self {
        let mut m = Logistic {
            w: vec![0.0; train[0].len()],
            b: 0.0,
        };
        for (x, &y) in train.iter().zip(labels) {
            let p = 1.0 / (1.0 + (-m.logit(x)).exp());
            let err = y as f64 - p;
            for (w, &v) in m.w.iter_mut().zip(x) {
                *w += eta * err * v as f64;
            }
            m.b += eta * err;
        }
        m
    }

    pub fn logit(&self, x: &[u32]) -> f64 {
        let mut acc = 0.0;
        for (w, &v) in self.w.iter().zip(x) {
            acc += w * v as f64;
        }
        acc + self.b
    }

    pub fn predict(&self, x: &[u32]) -> usize {
        usize::from(self.logit(x) >= 0.0)
    }
}

/// Whether the centre of pixel `(x, y)` lies in the diamond of diagonal
/// `size` centred at `(cx, cy)` and turned by `rotation_deg`.
///
/// Works from the four vertices and edge cross products. The rotation is
/// reduced modulo 90 degrees and rounded to 1e-6 first; the two edges
/// meeting at the vertex that starts at angle 270 degrees are closed, the
/// other two open.
pub fn in_diamond(cx: f64, cy: f64, size: f64, rotation_deg: f64, x: usize, y: usize) -> bool {
    let mut theta = (rotation_deg.rem_euclid(90.0) * 1e6).round() / 1e6;
    if theta >= 90.0 {
        theta = 0.0;
    }
    let r = size / 2.0;
    let vertex = |k: f64| {
        let a = (theta + 90.0 * k).to_radians();
        (cx + r * a.cos(), cy + r * a.sin())
    };
    let v = [vertex(0.0), vertex(1.0), vertex(2.0), vertex(3.0)];
    let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
    // counter-clockwise in (x, y): inside is to the left of each edge
    let side = |a: (f64, f64), b: (f64, f64)| (b.0 - a.0) * (py - a.1) - (b.1 - a.1) * (px - a.0);
    let closed = [false, false, true, true];
    (0..4).all(|k| {
        let s = side(v[k], v[(k + 1) % 4]);
        if closed[k] {
            s >= 0.0
        } else {
            s > 0.0
        }
    })
}

/// Rasterize glyphs by testing every pixel against every glyph.
pub fn rasterize(width: usize, height: usize, glyphs: &[(f64, f64, f64, f64)]) -> Vec<bool> {
    let mut out = vec![false; width * height];
    for y in 0..height {
        for x in 0..width {
            out[y * width + x] = glyphs
                .iter()
                .any(|&(cx, cy, size, rot)| size > 0.0 && in_diamond(cx, cy, size, rot, x, y));
        }
    }
    out
}
