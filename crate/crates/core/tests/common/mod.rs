#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twpacal::network::{linear_grid, NetworkData, TwoPortS};
use twpacal::touchstone::TouchstoneError;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rand_complex(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    Complex64::from_polar(radius * rng.random::<f64>().sqrt(), rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
}

/// Random matrix with every entry inside a disc, transmissions bounded away from zero.
pub fn rand_twoport(rng: &mut ChaCha8Rng) -> TwoPortS {
    let t = |rng: &mut ChaCha8Rng| Complex64::from_polar(rng.random_range(0.1..1.0), rng.random_range(-3.1..3.1));
    TwoPortS::new(rand_complex(rng, 0.9), t(rng), t(rng), rand_complex(rng, 0.9))
}

pub fn rand_grid(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let start = rng.random_range(1e6..5e9);
    let mut f = start;
    (0..n)
        .map(|_| {
            let v = f;
            f += rng.random_range(1e3..1e8);
            v
        })
        .collect()
}

pub fn rand_network(rng: &mut ChaCha8Rng, n: usize) -> NetworkData {
    let grid = rand_grid(rng, n);
    let s = (0..n).map(|_| rand_twoport(rng)).collect();
    NetworkData::new(grid, s, c(rng.random_range(10.0..100.0), 0.0)).unwrap()
}

/// Largest entry error relative to the largest entry of `want`, per point.
pub fn max_rel_err(got: &NetworkData, want: &NetworkData) -> f64 {
    got.s()
        .iter()
        .zip(want.s())
        .map(|(a, b)| {
            let scale = [b.s11, b.s21, b.s12, b.s22].iter().map(|z| z.norm()).fold(1e-300, f64::max);
            a.max_abs_diff(b) / scale
        })
        .fold(0.0, f64::max)
}

pub fn grid_401() -> Vec<f64> {
    linear_grid(4e9, 8e9, 401)
}

/// Name, file text, and a check for the error the text must produce.
pub type MalformedCase = (&'static str, &'static str, fn(&TouchstoneError) -> bool);

/// Malformed Touchstone inputs with a check for the error each must produce.
pub fn malformed_corpus() -> Vec<MalformedCase> {
    use TouchstoneError as E;
    vec![
        (
            "non-monotonic frequency",
            "# GHz S RI R 50\n1 0 0 1 0 1 0 0 0\n0.5 0 0 1 0 1 0 0 0\n",
            |e| matches!(e, E::NonMonotonicFrequency { line: 3, .. }),
        ),
        (
            "repeated frequency",
            "# GHz S RI R 50\n1 0 0 1 0 1 0 0 0\n1 0 0 1 0 1 0 0 0\n",
            |e| matches!(e, E::NonMonotonicFrequency { .. }),
        ),
        ("short row", "# GHz S RI R 50\n1 0 0 1 0 1 0 0\n", |e| matches!(e, E::WrongColumnCount { found: 8, .. })),
        ("long row", "# GHz S RI R 50\n1 0 0 1 0 1 0 0 0 0\n", |e| matches!(e, E::WrongColumnCount { found: 10, .. })),
        ("bad number", "# GHz S RI R 50\n1 0 0 abc 0 1 0 0 0\n", |e| matches!(e, E::InvalidNumber { .. })),
        ("nan value", "# GHz S RI R 50\n1 0 0 NaN 0 1 0 0 0\n", |e| matches!(e, E::InvalidNumber { .. })),
        ("y parameters", "# GHz Y RI R 50\n1 0 0 1 0 1 0 0 0\n", |e| matches!(e, E::UnsupportedParameterKind { .. })),
        ("unknown format", "# GHz S XY R 50\n1 0 0 1 0 1 0 0 0\n", |e| matches!(e, E::MalformedOptionLine { .. })),
        ("missing resistance", "# GHz S RI R\n1 0 0 1 0 1 0 0 0\n", |e| matches!(e, E::MalformedOptionLine { .. })),
        ("negative resistance", "# GHz S RI R -50\n1 0 0 1 0 1 0 0 0\n", |e| matches!(e, E::MalformedOptionLine { .. })),
        (
            "duplicate option line",
            "# GHz S RI R 50\n# GHz S RI R 50\n1 0 0 1 0 1 0 0 0\n",
            |e| matches!(e, E::MalformedOptionLine { .. }),
        ),
        ("data before option line", "1 0 0 1 0 1 0 0 0\n# GHz S RI R 50\n", |e| matches!(e, E::MalformedOptionLine { .. })),
        ("no option line", "! only comments\n", |e| matches!(e, E::MissingOptionLine)),
        ("no data", "# GHz S RI R 50\n! nothing\n", |e| matches!(e, E::EmptyData)),
        (
            "noise block",
            "# GHz S RI R 50\n1 0 0 1 0 1 0 0 0\n2 0 0 1 0 1 0 0 0\n0.5 1.2 0.3 40 0.5\n",
            |e| matches!(e, E::NoiseDataUnsupported { line: 4 }),
        ),
        ("v2 keyword", "[Version] 2.0\n# GHz S RI R 50\n1 0 0 1 0 1 0 0 0\n", |e| matches!(e, E::UnsupportedVersion { .. })),
        ("zero frequency", "# GHz S RI R 50\n0 0 0 1 0 1 0 0 0\n", |e| matches!(e, E::InvalidNumber { .. })),
        ("infinite magnitude", "# GHz S MA R 50\n1 inf 0 1 0 1 0 0 0\n", |e| matches!(e, E::InvalidNumber { .. })),
    ]
}

pub mod props {
    //! Network-algebra properties, each returning the measured error for one random case.

    use super::*;
    use twpacal::network::{cascade_point, make_component, renormalize, ComponentSpec, LineLoss, TwoPortT};

    fn rel(a: &TwoPortS, b: &TwoPortS) -> f64 {
        let scale = [b.s11, b.s21, b.s12, b.s22].iter().map(|z| z.norm()).fold(1.0, f64::max);
        a.max_abs_diff(b) / scale
    }

    pub fn associativity(seed: u64) -> f64 {
        let r = &mut rng(seed);
        let (a, b, d) = (rand_twoport(r), rand_twoport(r), rand_twoport(r));
        let left = cascade_point(&cascade_point(&a, &b).unwrap(), &d).unwrap();
        let right = cascade_point(&a, &cascade_point(&b, &d).unwrap()).unwrap();
        rel(&left, &right)
    }

    pub fn s_t_roundtrip(seed: u64) -> f64 {
        let s = rand_twoport(&mut rng(seed));
        rel(&s.to_t().unwrap().to_s().unwrap(), &s)
    }

    /// Zero when flipping twice returns the exact same bits.
    pub fn flip_involution(seed: u64) -> f64 {
        let s = rand_twoport(&mut rng(seed));
        if s.flipped().flipped() == s && s.flipped() != s {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn renormalization_roundtrip(seed: u64) -> f64 {
        let r = &mut rng(seed);
        let net = rand_network(r, 4);
        let z_new = c(r.random_range(5.0..200.0), 0.0);
        let back = renormalize(&renormalize(&net, z_new).unwrap(), net.z_ref()).unwrap();
        max_rel_err(&back, &net)
    }

    pub fn random_passive_spec(r: &mut ChaCha8Rng) -> ComponentSpec {
        let db = |r: &mut ChaCha8Rng| r.random_range(0.0..40.0);
        match r.random_range(0..7) {
            0 => ComponentSpec::Thru,
            1 => ComponentSpec::Attenuator { db: db(r) },
            2 => ComponentSpec::Line {
                delay_s: r.random_range(0.0..5e-9),
                loss: if r.random() {
                    LineLoss::Flat { db: db(r) }
                } else {
                    LineLoss::SqrtF { db_per_sqrt_hz: r.random_range(0.0..1e-4) }
                },
            },
            3 => ComponentSpec::PhaseShift { degrees: r.random_range(-720.0..720.0) },
            4 => ComponentSpec::Isolator { insertion_loss_db: db(r), isolation_db: db(r) },
            5 => ComponentSpec::OffsetShort { offset_delay_s: r.random_range(0.0..1e-9) },
            _ => {
                let il: f64 = r.random_range(0.0..10.0);
                let a2 = 10f64.powf(-il / 10.0);
                // smallest return loss that keeps |s11|^2 + |s21|^2 <= 1
                let rl_min = if a2 >= 1.0 { 0.0 } else { -10.0 * (1.0 - a2).log10() };
                ComponentSpec::CouplerThrough { insertion_loss_db: il, return_loss_db: rl_min + db(r) }
            }
        }
    }

    /// Largest singular value of a random passive component and of a random passive chain.
    pub fn passivity(seed: u64) -> f64 {
        let r = &mut rng(seed);
        let grid = rand_grid(r, 5);
        let z = c(50.0, 0.0);
        let specs: Vec<ComponentSpec> = (0..r.random_range(1..4)).map(|_| random_passive_spec(r)).collect();
        let nets: Vec<NetworkData> = specs.iter().map(|s| make_component(s, &grid, z).unwrap()).collect();
        let mut sv = nets[0].max_singular_value();
        // chains through an offset short have no transmission and cannot be cascaded in T-form
        if !specs.iter().any(|s| matches!(s, ComponentSpec::OffsetShort { .. })) {
            let chain = twpacal::network::cascade_all(&nets).unwrap().unwrap();
            sv = sv.max(chain.max_singular_value());
        }
        sv
    }

    pub fn reciprocity(seed: u64) -> f64 {
        let r = &mut rng(seed);
        let spec = loop {
            let s = random_passive_spec(r);
            if !matches!(s, ComponentSpec::Isolator { .. }) {
                break s;
            }
        };
        let net = make_component(&spec, &rand_grid(r, 5), c(50.0, 0.0)).unwrap();
        net.s().iter().map(|m| (m.s12 - m.s21).norm()).fold(0.0, f64::max)
    }

    pub fn t_cascade_matches_s_cascade(seed: u64) -> f64 {
        let r = &mut rng(seed);
        let (a, b) = (rand_twoport(r), rand_twoport(r));
        let via_t: TwoPortT = a.to_t().unwrap() * b.to_t().unwrap();
        // direct signal-flow formula
        let d = c(1.0, 0.0) - a.s22 * b.s11;
        let direct = TwoPortS::new(
            a.s11 + a.s12 * a.s21 * b.s11 / d,
            a.s21 * b.s21 / d,
            a.s12 * b.s12 / d,
            b.s22 + b.s12 * b.s21 * a.s22 / d,
        );
        rel(&via_t.to_s().unwrap(), &direct)
    }
}

pub mod trl_fixture {
    //! Standards measured through arbitrary error boxes, built only from network algebra.

    use super::*;
    use twpacal::network::{cascade, make_component, offset_short_reflection, ComponentSpec, LineLoss};
    use twpacal::trl::{ReflectNominal, TrlStandardSet};

    /// Random well-conditioned error box: `|s21|, |s12|` in [0.2, 1), reflections up to 0.4.
    pub fn random_box(grid: &[f64], seed: u64) -> NetworkData {
        let r = &mut rng(seed);
        let t = |r: &mut ChaCha8Rng| Complex64::from_polar(r.random_range(0.2..1.0), r.random_range(-3.1..3.1));
        let s = grid.iter().map(|_| TwoPortS::new(rand_complex(r, 0.4), t(r), t(r), rand_complex(r, 0.4))).collect();
        NetworkData::new(grid.to_vec(), s, c(50.0, 0.0)).unwrap()
    }

    pub fn embed(x: &NetworkData, inner: &NetworkData, y: &NetworkData) -> NetworkData {
        cascade(&cascade(x, inner).unwrap(), y).unwrap()
    }

    pub fn standards(x: &NetworkData, y: &NetworkData, line_delay_s: f64, reflect_offset_s: f64) -> TrlStandardSet {
        let grid = x.frequencies();
        let z = x.z_ref();
        let thru = make_component(&ComponentSpec::Thru, grid, z).unwrap();
        let line = make_component(&ComponentSpec::Line { delay_s: line_delay_s, loss: LineLoss::Flat { db: 0.0 } }, grid, z)
            .unwrap();
        let gamma: Vec<Complex64> = grid.iter().map(|&f| offset_short_reflection(f, reflect_offset_s)).collect();
        TrlStandardSet {
            raw_thru: embed(x, &thru, y),
            raw_line: embed(x, &line, y),
            raw_reflect_p1: x.s().iter().zip(&gamma).map(|(m, g)| m.input_reflection(*g)).collect(),
            raw_reflect_p2: y.s().iter().zip(&gamma).map(|(m, g)| m.output_reflection(*g)).collect(),
            reflect_nominal: ReflectNominal::OffsetShort { offset_delay_s: reflect_offset_s },
            line_delay_nominal: line_delay_s,
            line_impedance: z,
        }
    }
}

pub mod series {
    /// Port-1 reflection summed bounce by bounce: the direct reflection plus every
    /// wave that enters, makes `n` round trips and leaves through port 1 again.
    /// Sums at least `min_terms` bounces and continues until the remaining
    /// geometric tail is below `tail_tol`. Returns the sum and the bounce count.
    pub fn bounce_sum(ra: f64, rb: f64, ta: f64, g: f64, min_terms: usize, tail_tol: f64) -> (f64, usize) {
        let x = g * rb * ra;
        let mut total = ra;
        let mut wave = ta * g * rb * ta; // in, across, reflect, back out
        let mut n = 0;
        loop {
            total += wave;
            n += 1;
            let tail = if x.abs() < 1.0 { (wave * x).abs() / (1.0 - x.abs()) } else { f64::INFINITY };
            if n >= min_terms && tail <= tail_tol {
                return (total, n);
            }
            if n > 100_000 {
                return (f64::NAN, n);
            }
            wave *= x;
        }
    }

    /// Exactly `terms` bounces, no tail control.
    pub fn truncated_sum(ra: f64, rb: f64, ta: f64, g: f64, terms: usize) -> f64 {
        let x = g * rb * ra;
        let mut total = ra;
        let mut wave = ta * g * rb * ta;
        for _ in 0..terms {
            total += wave;
            wave *= x;
        }
        total
    }
}
