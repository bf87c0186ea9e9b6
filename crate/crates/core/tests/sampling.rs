use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use preint::lowdisc::{
    inverse_normal_cdf, normal_cdf, to_gaussian, DirectionNumbers, Scramble, SobolSampler,
    UniformStream,
};

fn sobol(dims: usize, scramble: Scramble) -> SobolSampler {
    SobolSampler::new(&DirectionNumbers::joe_kuo(dims).unwrap(), scramble)
}

#[test]
fn pseudo_gaussians_pass_chi_square() {
    let mut s = UniformStream::pseudo(1, 2024);
    let g = to_gaussian(&s.next_points::<f64>(1 << 14).unwrap()).unwrap();
    // 32 equiprobable bins under N(0, 1).
    let normal = Normal::new(0.0, 1.0).unwrap();
    let bins = 32;
    let mut counts = vec![0usize; bins];
    for &x in g.iter() {
        let b = ((normal.cdf(x) * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let expected = g.len() as f64 / bins as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat);
    assert!(p > 0.001, "chi-square {stat:.1}, p = {p:.2e}");
}

#[test]
fn scrambles_differ_but_stay_centered() {
    // Not a power of two: a full net has the same 1-D mean under every scramble.
    let n = 3000;
    let mean = |seed| {
        let mut s = sobol(8, Scramble::LinearAffine { seed });
        let mut p = [0.0f64; 8];
        let mut total = [0.0; 8];
        for _ in 0..n {
            s.next_into(&mut p).unwrap();
            for (t, v) in total.iter_mut().zip(&p) {
                *t += v;
            }
        }
        total.map(|t| t / n as f64)
    };
    let (a, b) = (mean(1), mean(2));
    let sigma = (1.0 / 12.0 / n as f64).sqrt();
    for c in 0..8 {
        assert_ne!(a[c], b[c]);
        assert!((a[c] - 0.5).abs() < 4.0 * sigma && (b[c] - 0.5).abs() < 4.0 * sigma);
    }
}

#[test]
fn first_two_coordinates_form_a_zero_net() {
    // Every elementary box of volume 2^-10 holds exactly one of the first 2^10 points.
    for scramble in [Scramble::None, Scramble::LinearAffine { seed: 5 }] {
        let mut s = sobol(2, scramble);
        let pts: Vec<[f64; 2]> = (0..1024)
            .map(|_| {
                let mut p = [0.0; 2];
                s.next_into(&mut p).unwrap();
                p
            })
            .collect();
        for a in 0..=10 {
            let (nx, ny) = (1usize << a, 1usize << (10 - a));
            let mut counts = vec![0u32; 1024];
            for p in &pts {
                let (i, j) = ((p[0] * nx as f64) as usize, (p[1] * ny as f64) as usize);
                counts[i * ny + j] += 1;
            }
            assert!(counts.iter().all(|&c| c == 1), "{scramble:?}, split {a}");
        }
    }
}

#[test]
fn one_dimensional_stratification_for_every_power() {
    for m in 1..=10u32 {
        let mut s = sobol(16, Scramble::LinearAffine { seed: m as u64 });
        let n = 1usize << m;
        let mut counts = vec![vec![0u32; n]; 16];
        let mut p = [0.0f64; 16];
        for _ in 0..n {
            s.next_into(&mut p).unwrap();
            for (c, &u) in counts.iter_mut().zip(&p) {
                c[(u * n as f64) as usize] += 1;
            }
        }
        assert!(counts.iter().flatten().all(|&c| c == 1), "m = {m}");
    }
}

#[test]
fn custom_direction_file_round_trip() {
    let path = std::env::temp_dir().join(format!("dirnums-{}.txt", std::process::id()));
    std::fs::write(&path, "d s a m_i\n2 1 0 1\n3 2 1 1 3\n").unwrap();
    let file = std::io::BufReader::new(std::fs::File::open(&path).unwrap());
    let loaded = DirectionNumbers::load(file, 3).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(loaded, DirectionNumbers::joe_kuo(3).unwrap());
}

proptest! {
    #[test]
    fn skip_ahead_agrees_with_stepping(seed in any::<u64>(), k in 0u64..5000) {
        let mut a = sobol(6, Scramble::LinearAffine { seed });
        let mut b = a.clone();
        let mut p = [0.0f64; 6];
        for _ in 0..k {
            a.next_into(&mut p).unwrap();
        }
        b.skip_to(k).unwrap();
        let mut q = [0.0f64; 6];
        a.next_into(&mut p).unwrap();
        b.next_into(&mut q).unwrap();
        prop_assert_eq!(p, q);
    }

    #[test]
    fn scrambled_points_are_interior(seed in any::<u64>(), start in 0u64..1_000_000) {
        let mut s = sobol(32, Scramble::LinearAffine { seed });
        s.skip_to(start).unwrap();
        let mut p = [0.0f64; 32];
        for _ in 0..64 {
            s.next_into(&mut p).unwrap();
            prop_assert!(p.iter().all(|&u| u > 0.0 && u < 1.0));
        }
    }

    #[test]
    fn inverse_normal_round_trips(u in 1e-12f64..1.0 - 1e-12) {
        let x = inverse_normal_cdf(u).unwrap();
        prop_assert!((normal_cdf(x) - u).abs() <= 1e-9);
    }

    #[test]
    fn inverse_normal_is_monotone(u in 1e-9f64..0.999, du in 1e-7f64..1e-3) {
        let v = (u + du).min(1.0 - 1e-12);
        prop_assert!(inverse_normal_cdf(u).unwrap() < inverse_normal_cdf(v).unwrap());
    }
}
