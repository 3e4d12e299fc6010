//! Acceptance gate: fourteen numbered criteria covering the full pipeline —
//! arithmetic identities, learning behavior, benchmark dominance, resource
//! counts, distributed equivalence, CLI determinism, and the concentration
//! bound on measured-register statistics. Each test prints one PASS line
//! with its measured margins; a failed assertion marks the criterion failed.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use qawa::arith::{
    activation_product_expectation, angle_encoded_state, angle_recovery_variance,
    cascade_effective, cascade_gates, cascade_invert, decode_expectation, encode_activation,
    recover_angles, recursive_weighted_sum, selu, selu_domain_max, selu_domain_min,
    single_block_expectation, single_block_sampled, ActivationEncoder,
};
use qawa::copula::dkw_bound;
use qawa::distributed::{bit_correlations_lenient, partition_learn, PartitionConfig};
use qawa::experiments::{run_benchmark, run_copula_experiment, BenchmarkConfig, CopulaLearnConfig};
use qawa::metrics::{cnot_count_weighted_sum, qawa_resources};
use qawa::oracle::{
    coin_cascade_expectation, coin_mixture_expectation, gradient, loss, run_forward, train,
    train_weights, Batch, QawaOracle, TargetSource, TargetSpec, TrainingConfig,
};
use qawa::problem::{build_portfolio_qubo, qubo_to_ising, IsingModel, PortfolioSpec};
use qawa::rng::RngStream;
use qawa::sim::{GateOp, StateVector};

fn synthetic_ising(n: usize, seed: u64) -> IsingModel {
    let mut rng = RngStream::from_seed(seed);
    let spec = PortfolioSpec::synthetic(n, &mut rng).unwrap();
    qubo_to_ising(&build_portfolio_qubo(&spec).unwrap()).unwrap()
}

#[test]
fn criterion_01_convex_combination_identity() {
    let t0 = Instant::now();
    let mut worst_exact = 0.0f64;
    for i in 0..21 {
        let x1 = -1.0 + 0.1 * i as f64;
        for j in 0..21 {
            let x2 = -1.0 + 0.1 * j as f64;
            for k in 0..11 {
                let w = 0.1 * k as f64;
                let z = single_block_expectation(x1, x2, w).unwrap();
                worst_exact = worst_exact.max((z - (w * x1 + (1.0 - w) * x2)).abs());
            }
        }
    }
    assert!(worst_exact < 1e-9, "statevector identity off by {worst_exact:.2e}");

    let mut rng = RngStream::from_seed(23);
    let mut worst_sigma = 0.0f64;
    for i in 0..21 {
        let x1 = -1.0 + 0.1 * i as f64;
        for j in 0..21 {
            let x2 = -1.0 + 0.1 * j as f64;
            for k in 0..11 {
                let w = 0.1 * k as f64;
                let est = single_block_sampled(x1, x2, w, 8192, &mut rng).unwrap();
                let truth = w * x1 + (1.0 - w) * x2;
                let sigma = ((1.0 - truth * truth) / 8192.0).sqrt().max(1e-12);
                let z = (est - truth).abs() / sigma;
                worst_sigma = worst_sigma.max(z);
                assert!(z <= 4.0, "sampled estimate at ({x1},{x2},{w}) deviates {z:.2}σ");
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 60.0, "runtime {secs:.1}s exceeds the one-minute budget");
    println!(
        "criterion 01 PASS: statevector sup {worst_exact:.2e} (tol 1e-9); sampled worst {worst_sigma:.2}σ (tol 4σ); {secs:.1}s"
    );
}

#[test]
fn criterion_02_cascade_simplex() {
    let t0 = Instant::now();
    let rng = RngStream::from_seed(29);
    // Closed form of the effective coefficients, recomputed literally.
    let mut worst_closed = 0.0f64;
    let mut worst_behave = 0.0f64;
    for m in 2..=6usize {
        let mut r = rng.child(m as u64);
        for _ in 0..50 {
            let w: Vec<f64> = (0..m - 1).map(|_| r.uniform()).collect();
            let eff = cascade_effective(&w).unwrap().effective;
            assert_eq!(eff.len(), m);
            let mut closed = vec![0.0f64; m];
            closed[0] = w.iter().product();
            for k in 1..m {
                closed[k] = (1.0 - w[k - 1]) * w[k..].iter().product::<f64>();
            }
            for (a, b) in eff.iter().zip(&closed) {
                worst_closed = worst_closed.max((a - b).abs());
            }
            let xs: Vec<f64> = (0..m).map(|_| 2.0 * r.uniform() - 1.0).collect();
            let direct: f64 = eff.iter().zip(&xs).map(|(c, x)| c * x).sum();
            let rec = recursive_weighted_sum(&xs, &w).unwrap();
            worst_behave = worst_behave.max((direct - rec).abs());
        }
    }
    assert!(worst_closed < 1e-12, "closed form off by {worst_closed:.2e}");
    assert!(worst_behave < 1e-12, "recursion disagrees by {worst_behave:.2e}");

    // Inversion reaches 1000 random simplex targets.
    let mut r = rng.child(99);
    let mut worst_residual = 0.0f64;
    for i in 0..1000 {
        let m = 2 + (i % 5);
        let mut t: Vec<f64> = (0..m).map(|_| -(r.uniform().max(1e-300)).ln()).collect();
        let s: f64 = t.iter().sum();
        for v in &mut t {
            *v /= s;
        }
        let w = cascade_invert(&t).unwrap();
        let eff = cascade_effective(&w).unwrap().effective;
        for (a, b) in eff.iter().zip(&t) {
            worst_residual = worst_residual.max((a - b).abs());
        }
    }
    assert!(worst_residual < 1e-9, "inversion residual {worst_residual:.2e}");
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 60.0, "runtime {secs:.1}s exceeds the one-minute budget");
    println!(
        "criterion 02 PASS: closed form {worst_closed:.2e} (tol 1e-12); 1000 inversions residual {worst_residual:.2e} (tol 1e-9); {secs:.1}s"
    );
}

#[test]
fn criterion_03_coin_mixing() {
    let ising = IsingModel { j: vec![vec![0.0; 3]; 3], h: vec![0.0; 3], offset: 0.0 };
    let params = qawa::qaoa::QaoaParams::new(vec![0.4], vec![0.3]).unwrap();
    let weights = vec![0.7, 0.4];
    let alt = vec![0.3, 0.6];
    let mut worst = 0.0f64;
    for step in 0..11 {
        let theta = FRAC_PI_2 * step as f64 / 10.0;
        let oracle = QawaOracle::new(
            ising.clone(),
            params.clone(),
            ActivationEncoder::default(),
            weights.clone(),
            alt.clone(),
            theta,
            vec![false; 3],
        )
        .unwrap();
        for bits in 0..8u64 {
            let xs: Vec<f64> = (0..3).map(|i| 1.0 - 2.0 * ((bits >> i) & 1) as f64).collect();
            let a = recursive_weighted_sum(&xs, &weights).unwrap();
            let b = recursive_weighted_sum(&xs, &alt).unwrap();
            let circuit = coin_cascade_expectation(&oracle, bits).unwrap();
            let mixture = coin_mixture_expectation(theta, a, b);
            worst = worst.max((circuit - mixture).abs());
        }
    }
    assert!(worst < 1e-9, "coin mixture identity off by {worst:.2e}");
    println!("criterion 03 PASS: 11-point θ sweep, sup |circuit − mixture| {worst:.2e} (tol 1e-9)");
}

#[test]
fn criterion_04_selu_round_trip() {
    let enc = ActivationEncoder::default();
    let (lo, hi) = (selu_domain_min(), selu_domain_max());
    let mut worst_single = 0.0f64;
    for i in 0..=100 {
        let x = lo + (hi - lo) * i as f64 / 100.0;
        let alpha = encode_activation(x, &enc).unwrap();
        let mut sv = StateVector::zero_state(1).unwrap();
        sv.apply_gate(&GateOp::Ry { q: 0, theta: alpha }).unwrap();
        let decoded = decode_expectation(&sv, 0);
        worst_single = worst_single.max((decoded - selu(x)).abs());
    }
    assert!(worst_single < 1e-9, "encode∘decode off by {worst_single:.2e}");

    let mut rng = RngStream::from_seed(31);
    let mut worst_product = 0.0f64;
    for n in 1..=4usize {
        let mut done = 0;
        while done < 25 {
            let xs: Vec<f64> = (0..n).map(|_| 2.0 * rng.uniform() - 1.0).collect();
            let p: f64 = xs.iter().product();
            if p <= lo + 1e-3 || p >= hi - 1e-3 {
                continue;
            }
            let got = activation_product_expectation(&xs, &enc).unwrap();
            worst_product = worst_product.max((got - selu(p)).abs());
            done += 1;
        }
    }
    assert!(worst_product < 1e-9, "product expectation off by {worst_product:.2e}");
    println!(
        "criterion 04 PASS: encode∘decode sup {worst_single:.2e}; n ≤ 4 product sup {worst_product:.2e} (tol 1e-9)"
    );
}

#[test]
fn criterion_05_angle_recovery() {
    let alphas = [PI / 6.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0];
    let state = angle_encoded_state(&alphas).unwrap();
    let mut biases = Vec::new();
    let mut worst_z = 0.0f64;
    for (si, shots) in [1_000u64, 10_000, 100_000].iter().enumerate() {
        let mut rng = RngStream::derived(5, si as u64);
        let samples = state.sample_bitstrings(*shots, &mut rng).unwrap();
        let rec = recover_angles(&samples).unwrap();
        let mut mean_abs = 0.0;
        for (k, &a) in alphas.iter().enumerate() {
            let pair_shots = samples.counts().get(&((k as u64) << 1)).copied().unwrap_or(0)
                + samples.counts().get(&(((k as u64) << 1) | 1)).copied().unwrap_or(0);
            let sigma = angle_recovery_variance(pair_shots).sqrt();
            let dev = (rec.alphas[k] - a).abs();
            mean_abs += dev / alphas.len() as f64;
            if *shots == 100_000 {
                worst_z = worst_z.max(dev / sigma);
                assert!(
                    dev <= 3.0 * sigma,
                    "angle {a:.3} recovered {:.4} off by {:.2}σ at 10⁵ shots",
                    rec.alphas[k],
                    dev / sigma
                );
            }
        }
        biases.push(mean_abs);
    }
    for pair in biases.windows(2) {
        assert!(pair[1] < pair[0], "bias not shrinking: {biases:?}");
    }
    println!(
        "criterion 05 PASS: worst recovery {worst_z:.2}σ at 10⁵ shots (tol 3σ); mean |bias| {:.4} → {:.4} → {:.4} monotone",
        biases[0], biases[1], biases[2]
    );
}

#[test]
fn criterion_06_gradient_correctness() {
    let enc = ActivationEncoder::default();
    let rng = RngStream::from_seed(21);
    let mut max_rel = 0.0f64;
    for b in 0..100u64 {
        let mut r = rng.child(b);
        let dim = 2 + (r.uniform() * 4.0) as usize;
        let bsz = 4 + (r.uniform() * 12.0) as usize;
        let weights: Vec<f64> = (0..dim).map(|_| 0.05 + 0.25 * r.uniform()).collect();
        // Keep every sample on a differentiable stretch of the activation:
        // away from the origin kink and the clamp saturation.
        let mut xs = Vec::with_capacity(bsz);
        while xs.len() < bsz {
            let x: Vec<f64> = (0..dim).map(|_| 2.0 * r.uniform() - 1.0).collect();
            let s: f64 = weights.iter().zip(&x).map(|(w, v)| w * v).sum();
            let u = s / enc.scale_a;
            if u.abs() > 0.05 && enc.activation(u).abs() < 0.95 {
                xs.push(x);
            }
        }
        let batch = Batch::new(xs, enc.clone()).unwrap();
        let target = if b % 2 == 0 {
            TargetSpec::scalar(0.4 * (2.0 * r.uniform() - 1.0), TargetSource::UserSupplied).unwrap()
        } else {
            let ts: Vec<f64> = (0..bsz).map(|_| 0.8 * (2.0 * r.uniform() - 1.0)).collect();
            TargetSpec::per_sample(ts, TargetSource::UserSupplied).unwrap()
        };
        let g = gradient(&weights, &batch, &target).unwrap();
        let h = 1e-6;
        let mut fd = vec![0.0f64; dim];
        for k in 0..dim {
            let mut wp = weights.clone();
            let mut wm = weights.clone();
            wp[k] += h;
            wm[k] -= h;
            fd[k] = (loss(&wp, &batch, &target).unwrap() - loss(&wm, &batch, &target).unwrap())
                / (2.0 * h);
        }
        let scale = g.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-12);
        let rel =
            g.iter().zip(&fd).fold(0.0f64, |a, (x, y)| a.max((x - y).abs())) / scale;
        max_rel = max_rel.max(rel);
        assert!(rel < 1e-6, "batch {b}: finite differences disagree, rel {rel:.2e}");
    }
    println!("criterion 06 PASS: 100 batches, max relative gradient error {max_rel:.2e} (tol 1e-6)");
}

#[test]
fn criterion_07_weight_reconstruction() {
    let t0 = Instant::now();
    let enc = ActivationEncoder::default();
    let rng = RngStream::from_seed(13);
    let mut worst = 0.0f64;
    for rep in 0..4u64 {
        let mut r = rng.child(rep);
        let mut c: Vec<f64> = (0..4).map(|_| -(r.uniform().max(1e-300)).ln()).collect();
        let s: f64 = c.iter().sum();
        for v in &mut c {
            *v /= s;
        }
        let batch = Batch::full_enumeration(4, &enc).unwrap();
        let ts: Vec<f64> = batch
            .xs
            .iter()
            .map(|x| {
                let s: f64 = c.iter().zip(x).map(|(a, b)| a * b).sum();
                enc.activated_value(s * enc.scale_a).unwrap().0
            })
            .collect();
        let target = TargetSpec::per_sample(ts, TargetSource::UserSupplied).unwrap();
        let cfg = TrainingConfig { eta: 0.2, iterations: 500, ..TrainingConfig::default() };
        let (w, trace) = train_weights(&batch, &target, &vec![0.25; 4], &cfg).unwrap();
        assert!(trace.losses.len() <= 501, "exceeded the 500-iteration budget");
        let l2: f64 = w.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        worst = worst.max(l2);
        assert!(l2 < 1e-6, "target {rep}: L2 error {l2:.2e}");
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 120.0, "runtime {secs:.1}s exceeds the two-minute budget");
    println!("criterion 07 PASS: 4 random targets recovered, worst L2 {worst:.2e} (tol 1e-6); {secs:.2}s");
}

#[test]
fn criterion_08_copula_learning() {
    let t0 = Instant::now();
    let cfg = CopulaLearnConfig::default();
    assert_eq!(cfg.n_assets, 4);
    assert_eq!(cfg.rho_intra, 0.7);
    assert_eq!(cfg.iterations, 150);
    let mut pass = 0;
    let mut kls = Vec::new();
    for seed in 0..10u64 {
        let out = run_copula_experiment(&cfg, &RngStream::derived(40, seed)).unwrap();
        let last = out.rows.last().unwrap();
        kls.push(last.kl);
        if last.kl < 0.01 && last.distance < 0.05 {
            pass += 1;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(pass >= 8, "only {pass}/10 seeds converged: final KLs {kls:?}");
    assert!(secs < 600.0, "runtime {secs:.1}s exceeds the ten-minute budget");
    println!(
        "criterion 08 PASS: {pass}/10 seeds with final KL < 0.01 and distance < 0.05 (need ≥ 8); {secs:.0}s"
    );
}

#[test]
fn criterion_09_benchmark_dominance() {
    let t0 = Instant::now();
    let sizes = [4usize, 5, 6, 7, 8];
    let out = run_benchmark(&sizes, 3, &BenchmarkConfig::default(), &RngStream::from_seed(2000)).unwrap();
    let mut qaoa = Vec::new();
    let mut qawa_means = Vec::new();
    for &n in &sizes {
        let q = out.rows.iter().find(|r| r.n == n && r.method == "qaoa").unwrap();
        let w = out.rows.iter().find(|r| r.n == n && r.method == "qawa").unwrap();
        assert_eq!(q.seeds, 20);
        assert!(
            w.mean >= q.mean,
            "size {n}: mean ratio {:.4} below the baseline {:.4}",
            w.mean,
            q.mean
        );
        qaoa.push(q.mean);
        qawa_means.push(w.mean);
    }
    let dominated = out.per_seed.iter().filter(|s| s.qawa >= s.qaoa).count();
    let freq = dominated as f64 / out.per_seed.len() as f64;
    assert!(freq >= 0.8, "seedwise dominance {freq:.2} below 0.8");
    for pair in qawa_means.windows(2) {
        assert!(
            pair[1] <= pair[0] + 1e-12,
            "mean ratios not nonincreasing: {qawa_means:?}"
        );
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 1800.0, "runtime {secs:.1}s exceeds the thirty-minute budget");
    println!(
        "criterion 09 PASS: means {:?} ≥ baseline {:?} per size; dominance {dominated}/{}; nonincreasing; {secs:.0}s",
        qawa_means.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
        qaoa.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
        out.per_seed.len()
    );
}

#[test]
fn criterion_10_resource_counts() {
    for n in 1..=16usize {
        let r = qawa_resources(n).unwrap();
        assert_eq!(r.cnots, 2 * (n - 1), "census disagrees at n={n}");
        assert_eq!(r.pairwise_measurements, n * (n - 1) / 2);
        assert_eq!(cnot_count_weighted_sum(n).unwrap(), 2 * (n - 1));
        if n >= 2 {
            // Independent census straight off the elementary-gate list.
            let gates = cascade_gates(&vec![0.3; n - 1]).unwrap();
            let entangling = gates.iter().filter(|g| g.is_entangling()).count();
            assert_eq!(entangling, 2 * (n - 1));
        }
    }
    println!("criterion 10 PASS: cascade census 2(n−1) and n(n−1)/2 pairwise outputs for n ∈ 1..=16");
}

#[test]
fn criterion_11_variance_law() {
    let n = 8usize;
    let mut report = Vec::new();
    for (wi, w) in [0.25f64, 0.5, 0.75].iter().enumerate() {
        let theta = (1.0 - 2.0 * w).acos();
        let mut sv = StateVector::zero_state(n).unwrap();
        for q in 0..n {
            sv.apply_gate(&GateOp::Ry { q, theta }).unwrap();
        }
        let mut trial_vars = Vec::new();
        for t in 0..5u64 {
            let mut rng = RngStream::derived(17, ((wi as u64) << 8) | t);
            let samples = sv.sample_bitstrings(1000, &mut rng).unwrap();
            let vals: Vec<f64> = samples
                .counts()
                .iter()
                .flat_map(|(&b, &c)| {
                    std::iter::repeat((b.count_ones() as f64) / 2.0).take(c as usize)
                })
                .collect();
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            trial_vars.push(
                vals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (vals.len() - 1) as f64,
            );
        }
        let mean_v = trial_vars.iter().sum::<f64>() / 5.0;
        let se = (trial_vars.iter().map(|v| (v - mean_v) * (v - mean_v)).sum::<f64>() / 4.0)
            .sqrt()
            / 5.0f64.sqrt();
        let pred = w * (1.0 - w) * n as f64 / 4.0;
        let z = (mean_v - pred).abs() / se;
        assert!(z <= 3.0, "w={w}: measured {mean_v:.4} vs predicted {pred:.4} is {z:.2}σ off");
        report.push(format!("w={w}: {z:.2}σ"));
    }
    println!(
        "criterion 11 PASS: variance matches w(1−w)n/4 at n=8, 10³ samples × 5 trials ({}) within 3σ",
        report.join(", ")
    );
}

#[test]
fn criterion_12_distributed_equivalence() {
    // Single-partition run against the standalone pipeline, bit for bit.
    let ising = synthetic_ising(4, 61);
    let cfg = PartitionConfig {
        training: TrainingConfig { iterations: 120, shots: 256, ..TrainingConfig::default() },
        sample_shots: 512,
        ..PartitionConfig::default()
    };
    let full: Vec<usize> = (0..4).collect();
    let out = partition_learn(&ising, &[full], &cfg, 7).unwrap();
    assert_eq!(out.workers.len(), 1);

    let mut reference = QawaOracle::new(
        ising.clone(),
        cfg.qaoa.clone(),
        ActivationEncoder::default(),
        vec![1.0; 3],
        vec![1.0; 3],
        FRAC_PI_2,
        vec![false; 4],
    )
    .unwrap();
    reference.set_learned_coefficients(&vec![0.25; 4]).unwrap();
    let rng = RngStream::from_seed(7);
    let (trained, trace) =
        train(&reference, &TargetSpec::brute_force_alignment(), &cfg.training, &rng).unwrap();
    let forward = run_forward(&trained, cfg.sample_shots, &rng.child(2)).unwrap();
    let c = bit_correlations_lenient(&forward.samples);

    let worker = &out.workers[0];
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<u64>>();
    assert_eq!(bits(&worker.trace.losses), bits(&trace.losses), "loss traces differ");
    assert_eq!(
        bits(&worker.partition.weights),
        bits(&cascade_effective(&trained.alt_weights).unwrap().effective),
        "learned coefficients differ"
    );
    for (row_a, row_b) in out.global_c.iter().zip(&c) {
        assert_eq!(bits(row_a), bits(row_b), "correlation matrices differ");
    }

    // Disjoint pairs against standalone blocks.
    let ising6 = synthetic_ising(6, 62);
    let subsets = vec![vec![0usize, 1], vec![2, 3], vec![4, 5]];
    let merged = partition_learn(&ising6, &subsets, &cfg, 21).unwrap();
    let mut worst = 0.0f64;
    for (m, subset) in subsets.iter().enumerate() {
        let k = subset.len();
        let mut h = Vec::new();
        let mut j = vec![vec![0.0f64; k]; k];
        for (a, &qa) in subset.iter().enumerate() {
            h.push(ising6.h[qa]);
            for (b, &qb) in subset.iter().enumerate() {
                j[a][b] = ising6.j[qa][qb];
            }
        }
        let sub = IsingModel { j, h, offset: ising6.offset };
        let mut oracle = QawaOracle::new(
            sub,
            cfg.qaoa.clone(),
            ActivationEncoder::default(),
            vec![1.0; k - 1],
            vec![1.0; k - 1],
            FRAC_PI_2,
            vec![false; k],
        )
        .unwrap();
        oracle.set_learned_coefficients(&vec![1.0 / k as f64; k]).unwrap();
        let stream = RngStream::derived(21, m as u64);
        let (block_trained, _) =
            train(&oracle, &TargetSpec::brute_force_alignment(), &cfg.training, &stream).unwrap();
        let fwd = run_forward(&block_trained, cfg.sample_shots, &stream.child(2)).unwrap();
        let block_c = bit_correlations_lenient(&fwd.samples);
        for (a, &qa) in subset.iter().enumerate() {
            for (b, &qb) in subset.iter().enumerate() {
                worst = worst.max((merged.global_c[qa][qb] - block_c[a][b]).abs());
            }
        }
    }
    assert!(worst < 1e-9, "standalone blocks deviate by {worst:.2e}");
    // Outside the blocks the merged matrix vanishes.
    for i in 0..6 {
        for j in 0..6 {
            if i / 2 != j / 2 {
                assert_eq!(merged.global_c[i][j], 0.0);
            }
        }
    }
    println!(
        "criterion 12 PASS: single partition bit-identical; disjoint pairs match standalone blocks within {worst:.2e} (tol 1e-9)"
    );
}

struct CommandCase {
    name: &'static str,
    extra_args: Vec<String>,
}

fn run_cli(args: &[String], out_dir: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_qawa"))
        .args(args)
        .env_remove("QAWA_SEED")
        .output()
        .expect("binary should launch");
    assert!(
        status.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&status.stderr)
    );
    assert!(out_dir.exists());
}

fn dir_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

#[test]
fn criterion_13_cli_determinism() {
    let base = std::env::temp_dir().join(format!("qawa-acceptance-{}", std::process::id()));
    let _ = fs::remove_dir_all(&base);
    fs::create_dir_all(&base).unwrap();

    // Price fixture shared by the ingest case.
    let fixture = base.join("fixture");
    run_cli(
        &[
            "synthetic".into(),
            "--rho".into(),
            "0.4".into(),
            "--assets".into(),
            "3".into(),
            "--days".into(),
            "120".into(),
            "--seed".into(),
            "33".into(),
            "--out".into(),
            fixture.to_str().unwrap().into(),
        ],
        &fixture,
    );
    let prices = fixture.join("prices.csv");

    let configs: &[(&str, &str)] = &[
        ("qaoa", r#"{"command": "qaoa", "problem": {"n_assets": 3}, "qaoa": {"p": 2}}"#),
        (
            "qawa",
            r#"{"command": "qawa", "problem": {"n_assets": 3}, "qawa": {"training": {"iterations": 20, "shots": 128}}}"#,
        ),
        (
            "benchmark",
            r#"{"command": "benchmark", "experiment": {"sizes": [4], "p": 1, "benchmark": {"seeds": 2}}}"#,
        ),
        ("copula", r#"{"command": "copula", "copula": {"iterations": 8, "batch": 200, "grid": 8}}"#),
        (
            "correlation",
            r#"{"command": "correlation", "experiment": {"correlation": {"n_qubits": 4, "samples": 200, "trials": 2, "xi": 1.0, "depth_sweep": [0, 2]}}}"#,
        ),
        (
            "validate",
            r#"{"command": "validate", "problem": {"n_assets": 4}, "qawa": {"training": {"iterations": 100, "shots": 256}}, "copula": {"iterations": 30, "batch": 300, "grid": 10}, "experiment": {"sizes": [4], "p": 2, "benchmark": {"seeds": 5}}}"#,
        ),
        (
            "distributed",
            r#"{"command": "distributed", "problem": {"n_assets": 4}, "distributed": {"workers": 2, "config": {"training": {"iterations": 20, "shots": 128}, "sample_shots": 128}}}"#,
        ),
    ];

    let mut cases: Vec<CommandCase> = vec![
        CommandCase {
            name: "synthetic",
            extra_args: vec![
                "synthetic".into(),
                "--rho".into(),
                "0.4".into(),
                "--assets".into(),
                "3".into(),
                "--days".into(),
                "120".into(),
                "--seed".into(),
                "33".into(),
            ],
        },
        CommandCase {
            name: "ingest",
            extra_args: vec!["ingest".into(), prices.to_str().unwrap().into()],
        },
    ];
    for (name, body) in configs {
        let path = base.join(format!("{name}.json"));
        fs::write(&path, body).unwrap();
        cases.push(CommandCase {
            name,
            extra_args: vec![
                "run".into(),
                "--config".into(),
                path.to_str().unwrap().into(),
                "--seed".into(),
                "17".into(),
            ],
        });
    }

    for case in &cases {
        let mut outs: Vec<PathBuf> = Vec::new();
        for rep in ["a", "b"] {
            let out_dir = base.join(format!("{}-{rep}", case.name));
            let mut args = case.extra_args.clone();
            args.push("--out".into());
            args.push(out_dir.to_str().unwrap().into());
            run_cli(&args, &out_dir);
            outs.push(out_dir);
        }
        let a = dir_files(&outs[0]);
        let b = dir_files(&outs[1]);
        assert_eq!(
            a.iter().map(|f| &f.0).collect::<Vec<_>>(),
            b.iter().map(|f| &f.0).collect::<Vec<_>>(),
            "{}: file sets differ",
            case.name
        );
        assert!(!a.is_empty(), "{}: produced no output files", case.name);
        for ((name_a, bytes_a), (_, bytes_b)) in a.iter().zip(&b) {
            assert_eq!(bytes_a, bytes_b, "{}: {name_a} differs between reruns", case.name);
        }
    }
    println!(
        "criterion 13 PASS: {} commands re-run byte-identical (synthetic, ingest, and all run modes)",
        cases.len()
    );
}

#[test]
fn criterion_14_dkw_conformance() {
    const K: u64 = 10_000;
    const EPS: f64 = 0.02;
    // Entangled two-bit register; the joint CDF of the measured bits has
    // evaluation lattice {0,1}², with truth from the exact amplitudes.
    let mut sv = StateVector::zero_state(2).unwrap();
    sv.apply_gate(&GateOp::Ry { q: 0, theta: 0.9 }).unwrap();
    sv.apply_gate(&GateOp::Ry { q: 1, theta: 1.3 }).unwrap();
    sv.apply_gate(&GateOp::Cx { control: 0, target: 1 }).unwrap();
    let probs: Vec<f64> = sv.amplitudes().iter().map(|a| a.norm_sqr()).collect();
    let truth = [probs[0], probs[0] + probs[1], probs[0] + probs[2]];

    let bound = dkw_bound(K, EPS, 2);
    let mut exceed = 0usize;
    let mut max_sup = 0.0f64;
    for seed in 0..200u64 {
        let mut rng = RngStream::derived(7, seed);
        let samples = sv.sample_bitstrings(K, &mut rng).unwrap();
        let emp = [
            samples.frequency(0),
            samples.frequency(0) + samples.frequency(1),
            samples.frequency(0) + samples.frequency(2),
        ];
        let sup =
            emp.iter().zip(&truth).fold(0.0f64, |a, (e, t)| a.max((e - t).abs()));
        max_sup = max_sup.max(sup);
        if sup > EPS {
            exceed += 1;
        }
    }
    let freq = exceed as f64 / 200.0;
    assert!(
        freq <= bound,
        "exceedance frequency {freq} above the bound {bound:.2e} ({exceed}/200)"
    );
    println!(
        "criterion 14 PASS: {exceed}/200 seeds exceeded ε=0.02 (bound 2ⁿe^(−2Kε²) = {bound:.2e}); max sup {max_sup:.4}"
    );
}
