use num_complex::Complex64;
use qpolar::modem::{init_llr, make_pam, make_rect_qam, transmit, NoiseModel};
use qpolar::oracle::{explicit_gn, vec_mat};
use qpolar::{
    channel_decode, channel_encode, polar_decode_transform, polar_encode, FieldSpec, FrozenStream, LlrVector,
    PolarCode, ScDecoder, Symbol,
};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_code(f: &FieldSpec, len: usize, k: usize, rng: &mut ChaCha8Rng) -> PolarCode {
    let mut info = sample(rng, len, k).into_vec();
    info.sort_unstable();
    PolarCode::from_info_set(f, len, &info).unwrap()
}

fn certain_llrs(q: usize, x: &[Symbol]) -> Vec<f64> {
    x.iter().flat_map(|&s| LlrVector::certain(q, s).0).collect()
}

#[test]
fn transform_roundtrip_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for q in [2, 3, 4, 5, 8] {
        let f = FieldSpec::new(q).unwrap();
        for n in 0..=10 {
            let len = 1 << n;
            for _ in 0..4 {
                let x: Vec<Symbol> = (0..len).map(|_| rng.random_range(0..q as Symbol)).collect();
                let u = polar_encode(&f, &x).unwrap();
                assert_eq!(polar_decode_transform(&f, &u).unwrap(), x);
            }
        }
    }
}

#[test]
fn noiseless_channel_identity_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for q in [2, 3, 4, 5, 8] {
        let f = FieldSpec::new(q).unwrap();
        for n in 0..=10 {
            let len = 1 << n;
            let mut dec = ScDecoder::new(&f, len).unwrap();
            for trial in 0..3u64 {
                let k = rng.random_range(0..=len);
                let code = random_code(&f, len, k, &mut rng);
                let seed = rng.random();
                let s: Vec<Symbol> = (0..k).map(|_| rng.random_range(0..q as Symbol)).collect();
                let x = channel_encode(&code, &s, &mut FrozenStream::for_frame(seed, &f, trial, len - k)).unwrap();
                let init = certain_llrs(q, &x);
                let got = channel_decode(&code, &mut dec, &init, FrozenStream::for_frame(seed, &f, trial, len - k));
                assert_eq!(got.unwrap(), s, "q={q} N={len} K={k}");
            }
        }
    }
}

#[test]
fn encoder_matches_matrix_inverse() {
    let f = FieldSpec::new(3).unwrap();
    let (_, ginv) = explicit_gn(&f, 8).unwrap();
    let code = PolarCode::from_info_set(&f, 8, &[3, 5, 6, 7]).unwrap();
    let s = [2, 0, 1, 2];
    let stream = FrozenStream::new(99, &f);
    let x = channel_encode(&code, &s, &mut stream.clone()).unwrap();
    let mut u = [0; 8];
    for (k, &i) in [3, 5, 6, 7].iter().enumerate() {
        u[i] = s[k];
    }
    for (k, &i) in [0, 1, 2, 4].iter().enumerate() {
        u[i] = stream.symbol_at(k as u64);
    }
    assert_eq!(x, vec_mat(&f, &u, &ginv));
}

#[test]
fn empty_message_depends_only_on_seed() {
    let f = FieldSpec::new(5).unwrap();
    let code = PolarCode::from_info_set(&f, 16, &[]).unwrap();
    let a = channel_encode(&code, &[], &mut FrozenStream::new(3, &f)).unwrap();
    let b = channel_encode(&code, &[], &mut FrozenStream::new(3, &f)).unwrap();
    let c = channel_encode(&code, &[], &mut FrozenStream::new(4, &f)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn mismatched_seed_breaks_decoding() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for q in [3, 5] {
        let f = FieldSpec::new(q).unwrap();
        let len = 256;
        let code = random_code(&f, len, len * 9 / 10, &mut rng);
        let frozen = len - code.info_set().len();
        let mut dec = ScDecoder::new(&f, len).unwrap();
        let mut failures = 0;
        let frames = 200;
        for frame in 0..frames {
            let s: Vec<Symbol> = code.info_set().iter().map(|_| rng.random_range(0..q as Symbol)).collect();
            let x = channel_encode(&code, &s, &mut FrozenStream::for_frame(1, &f, frame, frozen)).unwrap();
            let init = certain_llrs(q, &x);
            let got = channel_decode(&code, &mut dec, &init, FrozenStream::for_frame(2, &f, frame, frozen)).unwrap();
            failures += (got != s) as usize;
        }
        assert!(failures * 100 > frames as usize * 99, "q={q}: only {failures} of {frames} frames failed");
    }
}

#[test]
fn high_snr_modulated_chain_recovers_messages() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (c, label) in [(make_pam(5).unwrap(), "pam5"), (make_rect_qam(4).unwrap(), "16-qam")] {
        let c = c.normalized();
        let f = FieldSpec::new(c.q()).unwrap();
        let len = 128;
        let code = random_code(&f, len, 64, &mut rng);
        let noise = NoiseModel::from_snr_db(40.0, 1.0).unwrap();
        let mut dec = ScDecoder::new(&f, len).unwrap();
        let mut init = vec![0.0; len * (c.q() - 1)];
        for frame in 0..20 {
            let s: Vec<Symbol> = code.info_set().iter().map(|_| rng.random_range(0..c.q() as Symbol)).collect();
            let x = channel_encode(&code, &s, &mut FrozenStream::for_frame(8, &f, frame, 64)).unwrap();
            let y: Vec<Complex64> = transmit(&c, &x, &noise, &mut rng);
            for (chunk, &yj) in init.chunks_exact_mut(c.q() - 1).zip(&y) {
                init_llr(&c, yj, &noise, chunk);
            }
            let got = channel_decode(&code, &mut dec, &init, FrozenStream::for_frame(8, &f, frame, 64)).unwrap();
            assert_eq!(got, s, "{label} frame {frame}");
        }
    }
}
