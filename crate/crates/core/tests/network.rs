use proptest::prelude::*;
use rand::Rng;
use spikedx_core::gsn::GsnImage;
use spikedx_core::seed::{rng_from_seed, SimRng};
use spikedx_core::spike_codec::{encode_poisson, EncoderConfig, SpikeTrain};
use spikedx_core::wta_network::{
    collect_responses, init_network, model_string, parse_model, sample_softmax, stdp_update, train_epochs,
    NetworkConfig, NetworkState,
};

fn small(tile_w: usize, trigger: usize) -> NetworkConfig {
    NetworkConfig {
        image_width: 4,
        image_height: 2,
        tile_width: tile_w,
        tile_height: 2,
        hidden_per_tile: 3,
        output_neurons: 4,
        trigger_threshold: trigger,
        presentation_ms: 30.0,
        ..NetworkConfig::default()
    }
}

fn encoder() -> EncoderConfig {
    EncoderConfig {
        rate_hz: 400.0,
        duration_ms: 30.0,
        ..EncoderConfig::default()
    }
}

fn image(bits: &[bool]) -> GsnImage {
    GsnImage::from_pixels(4, 2, bits.to_vec()).unwrap()
}

/// Inverse-CDF draw on explicitly normalized softmax probabilities.
fn reference_softmax(u: &[f64], rng: &mut SimRng) -> usize {
    let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = u.iter().map(|v| (v - max).exp()).collect();
    let z: f64 = e.iter().sum();
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (i, v) in e.iter().enumerate() {
        acc += v / z;
        if r < acc {
            return i;
        }
    }
    u.len() - 1
}

/// Frozen single-tile network simulated from the description: potentials
/// sum afferent weights, a circuit fires once its pending spikes reach the
/// trigger, then every potential returns to baseline.
fn reference_run(state: &NetworkState, train: &SpikeTrain, rng: &mut SimRng) -> (Vec<u32>, Vec<(usize, usize)>) {
    let cfg = &state.config;
    assert_eq!(cfg.num_tiles(), 1);
    let (h, n, trigger) = (cfg.hidden_per_tile, cfg.output_neurons, cfg.trigger_threshold);
    let mut hp = vec![cfg.baseline_potential; h];
    let mut op = vec![cfg.baseline_potential; n];
    let (mut h_pending, mut o_pending) = (0, 0);
    let mut hidden_counts = vec![0; h];
    let mut events = Vec::new();
    for t in 0..train.timesteps() {
        let active = train.active_at(t);
        for &c in active {
            for (k, p) in hp.iter_mut().enumerate() {
                *p += state.hidden_weight(0, k, c as usize) as f64;
            }
        }
        h_pending += active.len();
        if active.is_empty() || h_pending < trigger {
            continue;
        }
        let winner = reference_softmax(&hp, rng);
        hidden_counts[winner] += 1;
        hp.fill(cfg.baseline_potential);
        h_pending = 0;
        for (k, p) in op.iter_mut().enumerate() {
            *p += state.output_weight(k, winner) as f64;
        }
        o_pending += 1;
        if o_pending < trigger {
            continue;
        }
        let out = reference_softmax(&op, rng);
        events.push((t, out));
        op.fill(cfg.baseline_potential);
        o_pending = 0;
    }
    (hidden_counts, events)
}

#[test]
fn softmax_frequencies_match_within_total_variation() {
    let u = [0.5, -1.0, 2.0, 0.0, 1.3];
    let max = 2.0f64;
    let z: f64 = u.iter().map(|v| (v - max).exp()).sum();
    let p: Vec<f64> = u.iter().map(|v| (v - max).exp() / z).collect();
    let mut rng = rng_from_seed(21);
    let draws = 100_000;
    let mut hits = [0usize; 5];
    for _ in 0..draws {
        hits[sample_softmax(&u, &mut rng)] += 1;
    }
    let tv: f64 = 0.5
        * hits
            .iter()
            .zip(&p)
            .map(|(&h, &q)| (h as f64 / draws as f64 - q).abs())
            .sum::<f64>();
    assert!(tv <= 0.02, "total variation {tv}");
}

#[test]
fn stdp_drift_vanishes_at_log_q() {
    for q in [0.2f64, 0.5, 0.8] {
        let w0 = q.ln() as f32;
        let (mut on, mut off) = ([w0], [w0]);
        stdp_update(&mut on, &[true], 0.01, (-5.0, 5.0));
        stdp_update(&mut off, &[false], 0.01, (-5.0, 5.0));
        let drift = q * (on[0] - w0) as f64 + (1.0 - q) * (off[0] - w0) as f64;
        assert!(drift.abs() < 1e-7, "q {q}: drift {drift}");
    }
}

/// A winner that sees the same 64-pixel pattern statistics on every cycle;
/// each pixel is on with probability `q` independently.
#[test]
fn stdp_weight_settles_at_log_q() {
    const PIXELS: usize = 64;
    for (i, q) in [0.2f64, 0.5, 0.8].into_iter().enumerate() {
        let mut rng = rng_from_seed(40 + i as u64);
        let mut w = [0.0f32; PIXELS];
        let mut tail = 0.0;
        for step in 0..10_000 {
            let x: Vec<bool> = (0..PIXELS).map(|_| rng.random::<f64>() < q).collect();
            stdp_update(&mut w, &x, 0.01, (-5.0, 5.0));
            if step >= 5_000 {
                tail += w.iter().map(|&v| v as f64).sum::<f64>() / PIXELS as f64;
            }
        }
        let mean = tail / 5_000.0;
        assert!((mean - q.ln()).abs() <= 0.05, "q {q}: mean weight {mean}");
    }
}

#[test]
fn frozen_network_matches_reference_simulation() {
    for trigger in [1, 3, 10] {
        let cfg = NetworkConfig {
            tile_width: 4,
            output_neurons: 5,
            ..small(4, trigger)
        };
        let state = init_network(&cfg, &mut rng_from_seed(trigger as u64)).unwrap();
        let img = image(&[true, false, true, true, false, true, true, false]);
        for seed in 0..20 {
            let train = encode_poisson(&img, &encoder(), &mut rng_from_seed(1000 + seed)).unwrap();
            let got = state.respond(&train, &mut rng_from_seed(seed)).unwrap();
            let (hidden, events) = reference_run(&state, &train, &mut rng_from_seed(seed));
            assert_eq!(got.hidden_counts, hidden, "trigger {trigger} seed {seed}");
            let got_events: Vec<(usize, usize)> = got.output.events.iter().map(|e| (e.t, e.neuron)).collect();
            assert_eq!(got_events, events, "trigger {trigger} seed {seed}");
        }
    }
}

#[test]
fn training_and_collection_repeat_under_a_seed() {
    let cfg = small(2, 2);
    let images: Vec<GsnImage> = (0..6u32)
        .map(|i| image(&(0..8).map(|p| (p + i) % 3 != 0).collect::<Vec<_>>()))
        .collect();
    let labels = [0, 1, 0, 1, 0, 1];
    let run = || {
        let mut state = init_network(&cfg, &mut rng_from_seed(1)).unwrap();
        train_epochs(&mut state, &images, &encoder(), 2, &mut rng_from_seed(2)).unwrap();
        let r = collect_responses(&state, &images, &labels, &encoder(), &mut rng_from_seed(3), false).unwrap();
        (state, r)
    };
    let (a, ra) = run();
    let (b, rb) = run();
    assert_eq!(a, b);
    assert_eq!(ra, rb);

    // a saved model answers exactly like the one in memory
    let loaded = parse_model(&model_string(&a)).unwrap();
    assert_eq!(loaded, a);
    let rl = collect_responses(&loaded, &images, &labels, &encoder(), &mut rng_from_seed(3), false).unwrap();
    assert_eq!(rl, ra);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn learning_keeps_weights_bounded_and_one_winner_per_cycle(
        seed in any::<u64>(),
        bits in prop::collection::vec(any::<bool>(), 8),
        trigger in 1usize..6,
        eta in 0.001f64..2.0,
    ) {
        let cfg = NetworkConfig { learning_rate: eta, ..small(2, trigger) };
        let mut state = init_network(&cfg, &mut rng_from_seed(seed)).unwrap();
        let mut rng = rng_from_seed(seed ^ 0x5a5a);
        for _ in 0..5 {
            let train = encode_poisson(&image(&bits), &encoder(), &mut rng).unwrap();
            let spikes = train.total_spikes() as u64;
            let res = state.present(&train, true, &mut rng).unwrap();
            prop_assert!(state.weights_in_bounds());
            prop_assert_eq!(res.hidden_counts.iter().map(|&c| c as u64).sum::<u64>(), res.hidden_cycles);
            prop_assert_eq!(res.response.total(), res.output_cycles);
            // pending evidence is cleared by every cycle
            prop_assert!(res.hidden_cycles * trigger as u64 <= spikes);
            prop_assert!(res.output_cycles * trigger as u64 <= res.hidden_cycles);
            let mut times: Vec<usize> = res.output.events.iter().map(|e| e.t).collect();
            let before = times.len();
            times.dedup();
            prop_assert_eq!(times.len(), before);
        }
    }
}
