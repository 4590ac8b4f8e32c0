use qpolar::construction::{
    check_degradation_ordering, estimate_z_mc, select_info_set, Criterion, DegradationMode, DmcChannel, McConfig, ZMode,
};
use qpolar::{compress, decompress, error_bound, exact_z_all, FieldSpec, JointSource, Symbol};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Z for both indices of an N = 2 code, written out from the kernel
/// `u0 = x0 + x1`, `u1 = x1` over a prime field.
fn two_index_z(model: &JointSource) -> [f64; 2] {
    let (q, ny) = (model.q(), model.ny());
    let p = |x: usize, y: usize| model.joint(x, y);
    let mut z0 = 0.0;
    let mut z1 = 0.0;
    for y0 in 0..ny {
        for y1 in 0..ny {
            let w0: Vec<f64> =
                (0..q).map(|u0| (0..q).map(|x1| p((u0 + q - x1) % q, y0) * p(x1, y1)).sum()).collect();
            for a in 0..q {
                for b in 0..q {
                    if a != b {
                        z0 += (w0[a] * w0[b]).sqrt();
                    }
                }
            }
            for u0 in 0..q {
                let w1: Vec<f64> = (0..q).map(|u1| p((u0 + q - u1) % q, y0) * p(u1, y1)).collect();
                for a in 0..q {
                    for b in 0..q {
                        if a != b {
                            z1 += (w1[a] * w1[b]).sqrt();
                        }
                    }
                }
            }
        }
    }
    let k = (q - 1) as f64;
    [z0 / k, z1 / k]
}

#[test]
fn exact_z_matches_hand_expansion_at_length_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for q in [2, 3, 5] {
        let f = FieldSpec::new(q).unwrap();
        for _ in 0..5 {
            let model = JointSource::random(q, 3, &mut rng);
            let got = exact_z_all(&f, &model, 2).unwrap();
            let want = two_index_z(&model);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-12, "{got:?} vs {want:?}");
            }
        }
    }
}

#[test]
fn monte_carlo_agrees_with_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (q, len) in [(2, 4), (3, 4), (5, 2)] {
        let f = FieldSpec::new(q).unwrap();
        let model = JointSource::random(q, 4, &mut rng);
        let exact = exact_z_all(&f, &model, len).unwrap();
        for mode in [ZMode::Averaged, ZMode::TrueSymbol] {
            let cfg = McConfig { mode, ..McConfig::new(20_000, 5) };
            let est = estimate_z_mc(&f, &model, len, &cfg).unwrap();
            for i in 0..len {
                let gap = (est.z[i] - exact[i]).abs();
                assert!(gap < 4.0 * est.stderr[i] + 1e-12, "q={q} i={i} {mode:?}: {} vs {}", est.z[i], exact[i]);
            }
        }
    }
}

#[test]
fn perfect_side_information_gives_zero() {
    let f = FieldSpec::new(3).unwrap();
    let joint: Vec<Vec<f64>> = (0..3).map(|x| (0..3).map(|y| if x == y { 1.0 / 3.0 } else { 0.0 }).collect()).collect();
    let model = JointSource::from_joint(&joint).unwrap();
    let est = estimate_z_mc(&f, &model, 64, &McConfig::new(50, 1)).unwrap();
    assert!(est.z.iter().all(|&z| z < 1e-12));
    assert!(exact_z_all(&f, &model, 4).unwrap().iter().all(|&z| z < 1e-12));
}

#[test]
fn useless_side_information_gives_one() {
    let f = FieldSpec::new(5).unwrap();
    let model = JointSource::from_joint(&vec![vec![0.1; 2]; 5]).unwrap();
    let est = estimate_z_mc(&f, &model, 32, &McConfig::new(50, 1)).unwrap();
    assert!(est.z.iter().all(|&z| (z - 1.0).abs() < 1e-9));
}

#[test]
fn mc_is_independent_of_worker_count() {
    let f = FieldSpec::new(5).unwrap();
    let model = JointSource::tables();
    let one = estimate_z_mc(&f, &model, 64, &McConfig::new(300, 9)).unwrap();
    let many = estimate_z_mc(&f, &model, 64, &McConfig { workers: 6, ..McConfig::new(300, 9) }).unwrap();
    assert_eq!(one, many);
}

#[test]
fn degradation_never_helps() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for q in [2, 3] {
        let f = FieldSpec::new(q).unwrap();
        for _ in 0..5 {
            let rows = (0..q).map(|_| (0..3).map(|_| rng.random_range(0.05..1.0)).collect()).collect::<Vec<Vec<f64>>>();
            let rows = rows.into_iter().map(|r| {
                let t: f64 = r.iter().sum();
                r.into_iter().map(|v| v / t).collect()
            });
            let better = DmcChannel::new(rows.collect()).unwrap();
            let w: Vec<Vec<f64>> = (0..3)
                .map(|_| {
                    let r: Vec<f64> = (0..2).map(|_| rng.random_range(0.0..1.0)).collect();
                    let t: f64 = r.iter().sum();
                    r.into_iter().map(|v| v / t).collect()
                })
                .collect();
            let report = check_degradation_ordering(&f, &better, &w, 4, DegradationMode::Exact).unwrap();
            assert!(report.holds(), "{report:?}");
        }
    }
}

#[test]
fn tables_source_compresses_and_recovers() {
    let f = FieldSpec::new(5).unwrap();
    let model = JointSource::tables();
    assert!((model.conditional_entropy_bits() - 1.90061).abs() < 0.02);

    let len = 512;
    let z = estimate_z_mc(&f, &model, len, &McConfig { workers: 4, ..McConfig::new(1000, 21) }).unwrap();
    let code = select_info_set(&f, z, Criterion::SumBound(1e-3)).unwrap();
    let floor = model.conditional_entropy_bits() / 5f64.log2();
    assert!(code.source_rate() > floor && code.source_rate() < 1.0, "rate {}", code.source_rate());
    assert!(error_bound(&code) <= 4e-3 + 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut x: Vec<Symbol> = vec![0; len];
    let mut y = vec![0; len];
    let mut errors = 0;
    let blocks = 100;
    for _ in 0..blocks {
        model.sample(&mut rng, &mut x, &mut y);
        let block = compress(&code, &x).unwrap();
        assert_eq!(block.frozen.len(), code.frozen_set().len());
        let got = decompress(&code, &block, &y, &model).unwrap();
        errors += got.iter().zip(&x).filter(|(a, b)| a != b).count();
    }
    let ser = errors as f64 / (blocks * len) as f64;
    assert!(ser < 2e-2, "ser {ser}");
}
