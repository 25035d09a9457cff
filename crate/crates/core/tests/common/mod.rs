#![allow(dead_code)]

use frameforge::{energy, Field, FrameMatrix, NormSpec, Scalar};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(d: usize, n: usize, field: Field, rng: &mut ChaCha8Rng) -> FrameMatrix {
    let data = DMatrix::from_fn(d, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = if field == Field::Complex { rng.sample(StandardNormal) } else { 0.0 };
        Scalar::new(re, im)
    });
    FrameMatrix::new(field, data).unwrap()
}

/// a + t·b
pub fn axpy(a: &FrameMatrix, t: f64, b: &FrameMatrix) -> FrameMatrix {
    let m = a.as_matrix() + b.as_matrix() * Scalar::new(t, 0.0);
    FrameMatrix::new(a.field(), m).unwrap()
}

pub fn with_matrix(field: Field, m: DMatrix<Scalar>) -> FrameMatrix {
    FrameMatrix::new(field, m).unwrap()
}

/// Central differences of the total energy on every real coordinate.
pub fn fd_gradient(frame: &FrameMatrix, spec: &NormSpec, h: f64) -> DMatrix<Scalar> {
    let base = frame.as_matrix().clone();
    let f = |m: DMatrix<Scalar>| energy(&with_matrix(frame.field(), m), spec).unwrap().total;
    let mut out = DMatrix::from_element(base.nrows(), base.ncols(), Scalar::new(0.0, 0.0));
    let parts: &[Scalar] = match frame.field() {
        Field::Real => &[Scalar::new(1.0, 0.0)],
        Field::Complex => &[Scalar::new(1.0, 0.0), Scalar::new(0.0, 1.0)],
    };
    for i in 0..base.nrows() {
        for j in 0..base.ncols() {
            for &dir in parts {
                let mut plus = base.clone();
                let mut minus = base.clone();
                plus[(i, j)] += dir * h;
                minus[(i, j)] -= dir * h;
                let slope = (f(plus) - f(minus)) / (2.0 * h);
                out[(i, j)] += dir * slope;
            }
        }
    }
    out
}

/// max |a − b| over entries, relative to max |b|.
pub fn max_relative_error(a: &DMatrix<Scalar>, b: &DMatrix<Scalar>) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let diff = a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    diff / scale
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// (FF*)^{-1/2} F, the canonical Parseval frame of a spanning F.
pub fn canonical_parseval(frame: &FrameMatrix) -> FrameMatrix {
    let eig = frame.frame_operator().symmetric_eigen();
    let inv_sqrt = eig.eigenvalues.map(|l| Scalar::new(1.0 / l.sqrt(), 0.0));
    let u = &eig.eigenvectors;
    let s = u * DMatrix::from_diagonal(&inv_sqrt) * u.adjoint();
    with_matrix(frame.field(), s * frame.as_matrix())
}

/// Rescales every column to squared norm `r`.
pub fn equalize_norms(frame: &FrameMatrix, r: f64) -> FrameMatrix {
    let mut m = frame.as_matrix().clone();
    for mut col in m.column_iter_mut() {
        let norm = col.norm();
        col /= Scalar::new(norm / r.sqrt(), 0.0);
    }
    with_matrix(frame.field(), m)
}

pub fn spec(d: usize, r: &[&str]) -> NormSpec {
    NormSpec::parse(d, r).unwrap()
}

/// Equal-norm spec plus two interior non-uniform admissible specs for each
/// desk-scale shape.
pub fn desk_specs() -> Vec<NormSpec> {
    vec![
        NormSpec::equal_norm(2, 3).unwrap(),
        spec(2, &["3/4", "3/4", "1/2"]),
        spec(2, &["5/6", "2/3", "1/2"]),
        NormSpec::equal_norm(2, 5).unwrap(),
        spec(2, &["1/2", "1/2", "1/3", "1/3", "1/3"]),
        spec(2, &["3/5", "1/2", "3/10", "3/10", "3/10"]),
        NormSpec::equal_norm(3, 5).unwrap(),
        spec(3, &["4/5", "3/5", "3/5", "1/2", "1/2"]),
        spec(3, &["2/3", "2/3", "2/3", "1/2", "1/2"]),
        NormSpec::equal_norm(4, 7).unwrap(),
        spec(4, &["4/5", "4/5", "1/2", "1/2", "1/2", "1/2", "2/5"]),
        spec(4, &["3/4", "3/4", "3/4", "1/2", "1/2", "3/8", "3/8"]),
    ]
}

/// Random invertible d×d matrix scaled so that |det| = 1.
pub fn unit_det_matrix(d: usize, field: Field, rng: &mut ChaCha8Rng) -> DMatrix<Scalar> {
    loop {
        let g = gaussian(d, d, field, rng).into_matrix();
        let det = g.determinant().norm();
        if det > 1e-3 {
            return g * Scalar::new(det.powf(-1.0 / d as f64), 0.0);
        }
    }
}

/// Random unit-modulus scalars, one per column (signs over the reals).
pub fn unit_phases(n: usize, field: Field, rng: &mut ChaCha8Rng) -> Vec<Scalar> {
    (0..n)
        .map(|_| match field {
            Field::Real => Scalar::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0),
            Field::Complex => Scalar::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)),
        })
        .collect()
}

pub fn transform(frame: &FrameMatrix, g: &DMatrix<Scalar>, phases: &[Scalar]) -> FrameMatrix {
    let mut m = g * frame.as_matrix();
    for (j, p) in phases.iter().enumerate() {
        m.column_mut(j).iter_mut().for_each(|z| *z *= p);
    }
    with_matrix(frame.field(), m)
}

/// The blockwise tight critical point [a·e1, a·e1, b·e2] with r = (2/3, 2/3, 2/3).
pub fn blockwise_example() -> (FrameMatrix, NormSpec) {
    let a = (22.0f64 / 41.0).sqrt();
    let b = (22.0f64 / 25.0).sqrt();
    let f = FrameMatrix::from_real_rows(2, 3, &[a, a, 0.0, 0.0, 0.0, b]).unwrap();
    (f, NormSpec::equal_norm(2, 3).unwrap())
}

/// [c·e1, c·e2, 0] with r = (2/3, 2/3, 2/3), a critical point with a zero column.
pub fn zero_column_example() -> (FrameMatrix, NormSpec) {
    let c = (22.0f64 / 25.0).sqrt();
    let f = FrameMatrix::from_real_rows(2, 3, &[c, 0.0, 0.0, 0.0, c, 0.0]).unwrap();
    (f, NormSpec::equal_norm(2, 3).unwrap())
}

/// Sorted-descending admissible vectors of length n with entries k/m,
/// m ≤ max_den, summing to d.
pub fn enumerate_admissible(d: usize, n: usize, max_den: i64) -> Vec<NormSpec> {
    use frameforge::check_admissible;
    use frameforge::spec::rat;
    let mut values: Vec<frameforge::Rational> = Vec::new();
    for m in 1..=max_den {
        for k in 1..=m {
            let v = rat(k, m);
            if !values.contains(&v) {
                values.push(v);
            }
        }
    }
    values.sort_by(|a, b| b.cmp(a));
    let target = rat(d as i64, 1);
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    fn rec(
        values: &[frameforge::Rational],
        start: usize,
        n: usize,
        d: usize,
        target: &frameforge::Rational,
        stack: &mut Vec<usize>,
        out: &mut Vec<NormSpec>,
    ) {
        if stack.len() == n {
            let r: Vec<_> = stack.iter().map(|&i| values[i].clone()).collect();
            let sum = r.iter().fold(frameforge::spec::rat(0, 1), |acc, x| acc + x);
            if &sum == target {
                let spec = NormSpec::new(d, r).unwrap();
                if check_admissible(&spec).admissible {
                    out.push(spec);
                }
            }
            return;
        }
        for i in start..values.len() {
            stack.push(i);
            rec(values, i, n, d, target, stack, out);
            stack.pop();
        }
    }
    rec(&values, 0, n, d, &target, &mut stack, &mut out);
    out
}
