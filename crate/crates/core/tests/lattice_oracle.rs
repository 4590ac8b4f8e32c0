use qpolar::oracle::{binary_reference_sc, exact_llrs_genie, exact_posterior};
use qpolar::construction::{estimate_z_mc, select_info_set, Criterion, McConfig};
use qpolar::modem::{init_llr_real, make_pam, transmit_real, AwgnSampler, NoiseModel};
use qpolar::{
    channel_encode, polar_decode_transform, polar_encode, FieldSpec, FrozenPolicy, FrozenStream, JointSource, ScDecoder,
    Symbol,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn likelihoods(model: &JointSource, y: &[usize]) -> Vec<Vec<f64>> {
    y.iter().map(|&yj| (0..model.q()).map(|x| model.joint(x, yj)).collect()).collect()
}

/// Every cell of the lattice against the enumerated posterior of the
/// sub-code that owns it.
fn check_lattice(f: &FieldSpec, len: usize, models: usize, seed: u64) -> f64 {
    let q = f.q();
    let n = len.trailing_zeros() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dec = ScDecoder::new(f, len).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..models {
        let model = JointSource::random(q, q + 1, &mut rng);
        let mut x = vec![0; len];
        let mut y = vec![0; len];
        model.sample(&mut rng, &mut x, &mut y);
        let lik = likelihoods(&model, &y);
        let mut init = vec![0.0; len * (q - 1)];
        model.init_llr(&y, &mut init);
        let u = polar_encode(f, &x).unwrap();
        let out = dec.decode(&init, &mut FrozenPolicy::genie(&u)).unwrap();
        assert_eq!(out.x, x);

        for level in 0..=n {
            let block = len >> level;
            for b in 0..len / block {
                let span = b * block..(b + 1) * block;
                let v = polar_encode(f, &x[span.clone()]).unwrap();
                let exact = exact_llrs_genie(f, &lik[span.clone()], &v).unwrap();
                for (j, want) in exact.iter().enumerate() {
                    let got = dec.llr_at(level, span.start + j);
                    for (a, b) in got.iter().zip(want) {
                        worst = worst.max((a - b).abs());
                    }
                    assert_eq!(dec.symbol_at(level, span.start + j), v[j]);
                }
            }
        }
    }
    worst
}

#[test]
fn every_lattice_level_matches_enumeration() {
    for q in [2, 3, 4, 5] {
        let f = FieldSpec::new(q).unwrap();
        for len in [2, 4, 8] {
            let worst = check_lattice(&f, len, 8, 100 * q as u64 + len as u64);
            assert!(worst < 1e-8, "q={q} N={len}: worst deviation {worst:e}");
        }
    }
}

#[test]
fn extension_fields_match_enumeration() {
    for q in [8, 9] {
        let f = FieldSpec::new(q).unwrap();
        let worst = check_lattice(&f, 4, 4, q as u64);
        assert!(worst < 1e-8, "q={q}: worst deviation {worst:e}");
    }
}

#[test]
fn single_posterior_matches_two_step_marginalization() {
    // N = 2: u0 = x0 + x1, u1 = x1.
    let f = FieldSpec::new(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let lik: Vec<Vec<f64>> = (0..2).map(|_| (0..3).map(|_| rng.random_range(0.1..1.0)).collect()).collect();
    let mut p0 = vec![0.0; 3];
    for x0 in 0..3 {
        for x1 in 0..3 {
            p0[(x0 + x1) % 3] += lik[0][x0] * lik[1][x1];
        }
    }
    let t: f64 = p0.iter().sum();
    let got = exact_posterior(&f, &lik, 0, &[]).unwrap();
    for (a, b) in got.iter().zip(&p0) {
        assert!((a - b / t).abs() < 1e-14);
    }
    for u0 in 0..3usize {
        let mut p1: Vec<f64> = (0..3).map(|u1| lik[0][(u0 + 3 - u1) % 3] * lik[1][u1]).collect();
        let t: f64 = p1.iter().sum();
        p1.iter_mut().for_each(|v| *v /= t);
        let got = exact_posterior(&f, &lik, 1, &[u0 as Symbol]).unwrap();
        for (a, b) in got.iter().zip(&p1) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}

#[test]
fn binary_decoder_matches_reference() {
    let f = FieldSpec::new(2).unwrap();
    let bpsk = make_pam(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (len, snr) in [(8, 2.0), (64, 3.0), (256, 3.0)] {
        let noise = NoiseModel::from_snr_db(snr, bpsk.es()).unwrap();
        let sampler = AwgnSampler { constellation: bpsk.clone(), noise, real_only: true };
        let z = estimate_z_mc(&f, &sampler, len, &McConfig::new(400, len as u64)).unwrap();
        let code = select_info_set(&f, z, Criterion::FixedRate(len / 2)).unwrap();
        let mut dec = ScDecoder::new(&f, len).unwrap();
        let mut llr = vec![0.0; len];
        for frame in 0..300 {
            let message: Vec<Symbol> = code.info_set().iter().map(|_| rng.random_range(0..2)).collect();
            let mut stream = FrozenStream::for_frame(7, &f, frame, code.frozen_set().len());
            let x = channel_encode(&code, &message, &mut stream.clone()).unwrap();
            let y = transmit_real(&bpsk, &x, &noise, &mut rng);
            for (out, &yj) in llr.iter_mut().zip(&y) {
                init_llr_real(&bpsk, yj, &noise, std::slice::from_mut(out));
            }
            let mut pattern = vec![None; len];
            for &i in code.frozen_set() {
                pattern[i] = Some(stream.next_symbol() as u8);
            }
            let want = binary_reference_sc(&llr, &pattern).unwrap();
            let stream = FrozenStream::for_frame(7, &f, frame, code.frozen_set().len());
            let got = dec.decode(&llr, &mut FrozenPolicy::stream(len, code.frozen_set(), stream).unwrap()).unwrap();
            let got: Vec<u8> = got.u.iter().map(|&s| s as u8).collect();
            assert_eq!(got, want, "N={len} frame {frame}");
        }
    }
}

#[test]
fn decoded_pair_is_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for q in [3, 4, 7] {
        let f = FieldSpec::new(q).unwrap();
        let len = 64;
        let init: Vec<f64> = (0..len * (q - 1)).map(|_| rng.random_range(-3.0..3.0)).collect();
        let out = ScDecoder::new(&f, len).unwrap().decode(&init, &mut FrozenPolicy::none(len)).unwrap();
        assert_eq!(polar_decode_transform(&f, &out.u).unwrap(), out.x);
    }
}
