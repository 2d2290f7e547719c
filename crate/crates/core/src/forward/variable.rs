use ndarray::{Array1, Array2, Zip};

use crate::error::{shape_err, Error, Result};
use crate::kappa::KappaField;
use crate::real::Real;
use crate::spectral::{EigenBasis, FractionalOrder, TimeSeriesField};

use super::linear::{check_source, Stepper};
use super::SolveConfig;

/// Minimum over the space-time grid of `1 - 2 kappa v`.
pub fn check_mass_coefficient<T: Real>(kappa: &KappaField<T>, v: &TimeSeriesField<T>) -> Result<T> {
    let k = kappa.sample(v.basis.domain(), &v.time)?;
    let vg = v.to_grid_series();
    Ok(mass_minimum(&mass_defect(&k.value, &vg.values)).0)
}

/// `q = 2 kappa v`, so the mass coefficient is `1 - q`.
pub(crate) fn mass_defect<T: Real>(kappa: &Array2<T>, v: &Array2<T>) -> Array2<T> {
    let two = T::lit(2.0);
    let mut q = Array2::zeros(v.raw_dim());
    Zip::from(&mut q)
        .and(kappa)
        .and(v)
        .for_each(|q, &k, &v| *q = two * k * v);
    q
}

/// Minimum of `1 - q` and its `(time, node)` location.
fn mass_minimum<T: Real>(q: &Array2<T>) -> (T, usize, usize) {
    let mut best = (T::one(), 0, 0);
    for ((n, j), &qv) in q.indexed_iter() {
        let a = T::one() - qv;
        if a < best.0 {
            best = (a, n, j);
        }
    }
    best
}

/// Solves `(1 - 2 kappa v) u_tt - Delta u + d_t (-Delta)^s u = f`.
///
/// Each step needs `(P - Q) y = b` with `P = 1 + dt (-Delta)^s / 2` (diagonal in
/// the eigenbasis) and `Q = analyze o (2 kappa v) o synthesize`. This is solved
/// by preconditioned CG with `P^-1`, which contracts at rate at most
/// `max |2 kappa v|`. Levels where `kappa v` vanishes identically skip the
/// iteration, so `kappa = 0` or `v = 0` runs exactly the linear scheme.
pub fn solve_variable_coefficient<T: Real>(
    kappa: &KappaField<T>,
    v: &TimeSeriesField<T>,
    f: &TimeSeriesField<T>,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<TimeSeriesField<T>> {
    f.check_compatible(v)?;
    let k = kappa.sample(f.basis.domain(), &f.time)?;
    let q = mass_defect(&k.value, &v.to_grid_series().values);
    solve_with_defect(&q, f, s, cfg)
}

pub(crate) fn solve_with_defect<T: Real>(
    q: &Array2<T>,
    f: &TimeSeriesField<T>,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<TimeSeriesField<T>> {
    check_source(f, cfg)?;
    if q.dim() != (f.n_times(), f.basis.domain().n_nodes()) {
        return Err(shape_err(
            format!("{:?}", (f.n_times(), f.basis.domain().n_nodes())),
            format!("{:?}", q.dim()),
        ));
    }
    let (min, time_index, node_index) = mass_minimum(q);
    if min < cfg.coefficient_floor {
        return Err(Error::Degenerate {
            min: min.to_f64_lossy(),
            floor: cfg.coefficient_floor.to_f64_lossy(),
            time_index,
            node_index,
        });
    }
    cfg.check_cfl(&f.basis, min)?;
    let stepper = Stepper::new(f, s);
    let coeffs = stepper.run(&f.coeffs, |n, b| {
        let qn = q.row(n);
        if qn.iter().all(|v| *v == T::zero()) {
            return Ok(stepper.precondition(&b));
        }
        let qn = qn.to_owned();
        pcg(&f.basis, &stepper, &qn, &b, cfg)
    })?;
    Ok(TimeSeriesField {
        coeffs,
        ..f.clone()
    })
}

fn mass_apply<T: Real>(
    basis: &EigenBasis<T>,
    stepper: &Stepper<T>,
    q: &Array1<T>,
    y: &Array1<T>,
) -> Array1<T> {
    let qy = basis.analyze((&basis.synthesize(y.view()) * q).view());
    &(y * &stepper.precond) - &qy
}

fn pcg<T: Real>(
    basis: &EigenBasis<T>,
    stepper: &Stepper<T>,
    q: &Array1<T>,
    b: &Array1<T>,
    cfg: &SolveConfig<T>,
) -> Result<Array1<T>> {
    let bnorm = b.dot(b).sqrt();
    if bnorm == T::zero() {
        return Ok(Array1::zeros(b.len()));
    }
    let mut x = stepper.precondition(b);
    let mut r = b - &mass_apply(basis, stepper, q, &x);
    let mut z = stepper.precondition(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let mut rnorm = r.dot(&r).sqrt();
    for _ in 0..cfg.inner_max_iter {
        if rnorm <= cfg.inner_tol * bnorm {
            return Ok(x);
        }
        let ap = mass_apply(basis, stepper, q, &p);
        let alpha = rz / p.dot(&ap);
        x.scaled_add(alpha, &p);
        r.scaled_add(-alpha, &ap);
        rnorm = r.dot(&r).sqrt();
        z = stepper.precondition(&r);
        let rz_new = r.dot(&z);
        p = &z + &(p * (rz_new / rz));
        rz = rz_new;
    }
    if rnorm <= cfg.inner_tol * bnorm {
        return Ok(x);
    }
    Err(Error::NotConverged {
        what: "mass matrix solve",
        iterations: cfg.inner_max_iter,
        achieved: (rnorm / bnorm).to_f64_lossy(),
        requested: cfg.inner_tol.to_f64_lossy(),
    })
}
