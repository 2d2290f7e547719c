//! The nonlinearity coefficient `kappa(x, t)`.
//!
//! Closed-form presets carry analytic time derivatives; grid-valued fields
//! fall back to second-order differences in time. Everything downstream works
//! with [`KappaSamples`], the value and first two time derivatives at every
//! node and time level.

use ndarray::Array2;

use crate::error::{shape_err, Error, Result};
use crate::real::Real;
use crate::spectral::{DomainSpec, EigenBasis, GridSeries, TimeGrid, TimeStencil};

/// Time profile `offset + slope t + amplitude sin(omega t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeProfile<T> {
    pub offset: T,
    pub slope: T,
    pub amplitude: T,
    pub omega: T,
}

impl<T: Real> TimeProfile<T> {
    fn eval(&self, t: T) -> [T; 3] {
        let (s, c) = (self.omega * t).sin_cos();
        [
            self.offset + self.slope * t + self.amplitude * s,
            self.slope + self.amplitude * self.omega * c,
            -self.amplitude * self.omega * self.omega * s,
        ]
    }
}

/// Smooth compactly supported profile `exp(1 - 1/(1 - r^2))` for `|r| < 1`,
/// normalized to 1 at `r = 0`, and exactly 0 elsewhere.
pub fn mollifier<T: Real>(r: T) -> T {
    let r2 = r * r;
    if r2 >= T::one() {
        T::zero()
    } else {
        (T::one() - T::one() / (T::one() - r2)).exp()
    }
}

/// Tensor basis `psi_i(x) P_p(2t/T - 1)`: the first `space_modes` Dirichlet
/// modes (unnormalized sines, eigenvalue order) times Legendre polynomials up
/// to `time_degree`. Coefficient `i * (time_degree + 1) + p`.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaBasis {
    pub space_modes: Vec<[usize; 2]>,
    pub time_degree: usize,
}

impl KappaBasis {
    pub fn new<T: Real>(
        basis: &EigenBasis<T>,
        space_modes: usize,
        time_degree: usize,
    ) -> Result<Self> {
        if space_modes == 0 || space_modes > basis.n_modes() {
            return Err(Error::Config(format!(
                "kappa basis needs 1..={} spatial modes, got {space_modes}",
                basis.n_modes()
            )));
        }
        Ok(Self {
            space_modes: basis.modes()[..space_modes]
                .iter()
                .map(|m| m.index)
                .collect(),
            time_degree,
        })
    }

    pub fn len(&self) -> usize {
        self.space_modes.len() * (self.time_degree + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn spatial<T: Real>(&self, domain: &DomainSpec<T>, i: usize, x: [T; 2]) -> T {
        let k = self.space_modes[i];
        (0..domain.dim()).fold(T::one(), |acc, d| {
            acc * (T::from_usize_lossy(k[d]) * T::PI() * x[d] / domain.lengths()[d]).sin()
        })
    }

    /// Values of every basis function, `(n_basis, n_times, n_nodes)` flattened
    /// per function, together with first and second time derivatives.
    #[allow(clippy::needless_range_loop)]
    fn functions<T: Real>(
        &self,
        domain: &DomainSpec<T>,
        time: &TimeGrid<T>,
    ) -> Vec<[Array2<T>; 3]> {
        let nt = time.n_times();
        let nx = domain.n_nodes();
        let legendre: Vec<Vec<[T; 3]>> = (0..nt)
            .map(|n| legendre_with_derivatives(self.time_degree, time.time(n), time.t_final()))
            .collect();
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.space_modes.len() {
            let psi: Vec<T> = (0..nx)
                .map(|j| self.spatial(domain, i, domain.position(j)))
                .collect();
            for p in 0..=self.time_degree {
                let make = |der: usize| {
                    Array2::from_shape_fn((nt, nx), |(n, j)| psi[j] * legendre[n][p][der])
                };
                out.push([make(0), make(1), make(2)]);
            }
        }
        out
    }

    /// `kappa = sum_i c_i b_i` on the space-time grid.
    pub fn expand<T: Real>(
        &self,
        coeffs: &[T],
        domain: &DomainSpec<T>,
        time: &TimeGrid<T>,
    ) -> Result<GridSeries<T>> {
        Ok(self
            .expand_samples(coeffs, domain, time)?
            .value_series(domain, time))
    }

    fn expand_samples<T: Real>(
        &self,
        coeffs: &[T],
        domain: &DomainSpec<T>,
        time: &TimeGrid<T>,
    ) -> Result<KappaSamples<T>> {
        if coeffs.len() != self.len() {
            return Err(shape_err(self.len(), coeffs.len()));
        }
        let shape = (time.n_times(), domain.n_nodes());
        let mut acc = [
            Array2::zeros(shape),
            Array2::zeros(shape),
            Array2::zeros(shape),
        ];
        for (c, f) in coeffs.iter().zip(self.functions(domain, time)) {
            for d in 0..3 {
                acc[d].scaled_add(*c, &f[d]);
            }
        }
        let [value, dt, dtt] = acc;
        Ok(KappaSamples { value, dt, dtt })
    }

    /// Adjoint of [`KappaBasis::expand`] for the space-time inner product:
    /// `c_i = <b_i, y>`.
    pub fn adjoint<T: Real>(&self, y: &GridSeries<T>) -> Vec<T> {
        let fs = self.functions(&y.domain, &y.time);
        fs.iter()
            .map(|f| {
                let g = GridSeries {
                    domain: y.domain.clone(),
                    time: y.time,
                    values: f[0].clone(),
                };
                g.inner(y)
            })
            .collect()
    }

    /// Least-squares projection of grid values onto the basis.
    pub fn project<T: Real>(&self, y: &GridSeries<T>) -> Result<Vec<T>> {
        let fs = self.functions(&y.domain, &y.time);
        let series: Vec<GridSeries<T>> = fs
            .into_iter()
            .map(|f| GridSeries {
                domain: y.domain.clone(),
                time: y.time,
                values: f[0].clone(),
            })
            .collect();
        let n = series.len();
        let mut gram = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            for j in 0..=i {
                let g = series[i].inner(&series[j]);
                gram[i][j] = g;
                gram[j][i] = g;
            }
        }
        let rhs: Vec<T> = series.iter().map(|s| s.inner(y)).collect();
        solve_dense(gram, rhs)
    }
}

/// Gaussian elimination with partial pivoting for the small Gram systems.
#[allow(clippy::needless_range_loop)]
fn solve_dense<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .expect("finite")
            })
            .expect("non-empty");
        if a[piv][col].abs() <= T::epsilon() * T::lit(1e-3) {
            return Err(Error::Config(
                "kappa basis is rank deficient on this grid".into(),
            ));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let s: T = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}

fn legendre_with_derivatives<T: Real>(degree: usize, t: T, t_final: T) -> Vec<[T; 3]> {
    let tau = T::lit(2.0) * t / t_final - T::one();
    let j1 = T::lit(2.0) / t_final;
    let mut p = vec![[T::zero(); 3]; degree + 1];
    p[0] = [T::one(), T::zero(), T::zero()];
    if degree >= 1 {
        p[1] = [tau, T::one(), T::zero()];
    }
    for n in 1..degree {
        let nf = T::from_usize_lossy(n);
        let two_n1 = T::from_usize_lossy(2 * n + 1);
        let val = (two_n1 * tau * p[n][0] - nf * p[n - 1][0]) / (nf + T::one());
        let d1 = p[n - 1][1] + two_n1 * p[n][0];
        let d2 = p[n - 1][2] + two_n1 * p[n][1];
        p[n + 1] = [val, d1, d2];
    }
    p.into_iter()
        .map(|[v, d1, d2]| [v, d1 * j1, d2 * j1 * j1])
        .collect()
}

/// The coefficient of the nonlinearity.
#[derive(Debug, Clone, PartialEq)]
pub enum KappaField<T> {
    Constant(T),
    /// `amplitude * prod_d sin(mode_d pi x_d / L_d)`
    SinMode {
        amplitude: T,
        mode: [usize; 2],
    },
    /// `amplitude * exp(-|x - center|^2 / width^2)`
    GaussianBump {
        amplitude: T,
        center: [T; 2],
        width: T,
    },
    /// `amplitude * prod_d mollifier((x_d - center_d) / radius)`, exactly zero
    /// outside the box of half-width `radius`.
    SmoothBump {
        amplitude: T,
        center: [T; 2],
        radius: T,
    },
    /// `spatial(x) * profile(t)`; `spatial` must itself be time-independent.
    Separable {
        spatial: Box<KappaField<T>>,
        profile: TimeProfile<T>,
    },
    Coefficients {
        basis: KappaBasis,
        coeffs: Vec<T>,
    },
    Grid(GridSeries<T>),
    /// Pointwise sum of the parts.
    Sum(Vec<KappaField<T>>),
}

/// `kappa`, `d_t kappa` and `d_t^2 kappa` on the space-time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaSamples<T> {
    pub value: Array2<T>,
    pub dt: Array2<T>,
    pub dtt: Array2<T>,
}

impl<T: Real> KappaSamples<T> {
    pub fn is_zero(&self) -> bool {
        self.value.iter().all(|v| *v == T::zero())
            && self.dt.iter().all(|v| *v == T::zero())
            && self.dtt.iter().all(|v| *v == T::zero())
    }

    pub fn max_abs(&self) -> T {
        self.value.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn value_series(&self, domain: &DomainSpec<T>, time: &TimeGrid<T>) -> GridSeries<T> {
        GridSeries {
            domain: domain.clone(),
            time: *time,
            values: self.value.clone(),
        }
    }
}

impl<T: Real> KappaField<T> {
    /// Spatial value, if the field is a time-independent closed form.
    fn spatial_value(&self, domain: &DomainSpec<T>, x: [T; 2]) -> Option<T> {
        let dim = domain.dim();
        match self {
            KappaField::Constant(c) => Some(*c),
            KappaField::SinMode { amplitude, mode } => Some((0..dim).fold(*amplitude, |acc, d| {
                acc * (T::from_usize_lossy(mode[d]) * T::PI() * x[d] / domain.lengths()[d]).sin()
            })),
            KappaField::GaussianBump {
                amplitude,
                center,
                width,
            } => {
                let r2 = (0..dim)
                    .map(|d| (x[d] - center[d]).powi(2))
                    .fold(T::zero(), |a, b| a + b);
                Some(*amplitude * (-r2 / (*width * *width)).exp())
            }
            KappaField::SmoothBump {
                amplitude,
                center,
                radius,
            } => Some((0..dim).fold(*amplitude, |acc, d| {
                acc * mollifier((x[d] - center[d]) / *radius)
            })),
            KappaField::Sum(parts) => parts
                .iter()
                .map(|p| p.spatial_value(domain, x))
                .sum::<Option<T>>(),
            _ => None,
        }
    }

    /// Samples value and time derivatives on the grid.
    pub fn sample(&self, domain: &DomainSpec<T>, time: &TimeGrid<T>) -> Result<KappaSamples<T>> {
        let shape = (time.n_times(), domain.n_nodes());
        match self {
            KappaField::Separable { spatial, profile } => {
                let psi: Vec<T> = (0..domain.n_nodes())
                    .map(|j| {
                        spatial
                            .spatial_value(domain, domain.position(j))
                            .ok_or_else(|| {
                                Error::Config(
                                    "separable kappa needs a closed-form spatial factor".into(),
                                )
                            })
                    })
                    .collect::<Result<_>>()?;
                let prof: Vec<[T; 3]> = (0..time.n_times())
                    .map(|n| profile.eval(time.time(n)))
                    .collect();
                let make = |d: usize| Array2::from_shape_fn(shape, |(n, j)| psi[j] * prof[n][d]);
                Ok(KappaSamples {
                    value: make(0),
                    dt: make(1),
                    dtt: make(2),
                })
            }
            KappaField::Coefficients { basis, coeffs } => {
                basis.expand_samples(coeffs, domain, time)
            }
            KappaField::Grid(g) => {
                if &g.domain != domain || &g.time != time {
                    return Err(shape_err(
                        format!("{time:?} on {domain:?}"),
                        format!("{:?} on {:?}", g.time, g.domain),
                    ));
                }
                Ok(KappaSamples {
                    value: g.values.clone(),
                    dt: TimeStencil::first_derivative(*time)?.apply(&g.values),
                    dtt: TimeStencil::second_derivative(*time)?.apply(&g.values),
                })
            }
            KappaField::Sum(parts) => {
                let mut acc = KappaSamples {
                    value: Array2::zeros(shape),
                    dt: Array2::zeros(shape),
                    dtt: Array2::zeros(shape),
                };
                for p in parts {
                    let k = p.sample(domain, time)?;
                    acc.value += &k.value;
                    acc.dt += &k.dt;
                    acc.dtt += &k.dtt;
                }
                Ok(acc)
            }
            _ => {
                let psi: Vec<T> = (0..domain.n_nodes())
                    .map(|j| {
                        self.spatial_value(domain, domain.position(j))
                            .expect("closed form")
                    })
                    .collect();
                Ok(KappaSamples {
                    value: Array2::from_shape_fn(shape, |(_, j)| psi[j]),
                    dt: Array2::zeros(shape),
                    dtt: Array2::zeros(shape),
                })
            }
        }
    }

    /// Rejects fields with `max |kappa| > kappa_max` on the grid.
    pub fn check_bounded(
        &self,
        domain: &DomainSpec<T>,
        time: &TimeGrid<T>,
        kappa_max: T,
    ) -> Result<()> {
        let m = self.sample(domain, time)?.max_abs();
        if m > kappa_max {
            return Err(Error::Config(format!(
                "max |kappa| = {m} exceeds the bound {kappa_max}"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::build_basis;
    use std::f64::consts::PI;

    fn setup() -> (DomainSpec<f64>, TimeGrid<f64>) {
        (
            DomainSpec::interval(PI, 16).unwrap(),
            TimeGrid::new(2.0, 40).unwrap(),
        )
    }

    #[test]
    fn mollifier_profile() {
        assert_eq!(mollifier(0.0f64), 1.0);
        assert_eq!(mollifier(1.0f64), 0.0);
        assert_eq!(mollifier(-1.3f64), 0.0);
        assert!(mollifier(0.5f64) > 0.0 && mollifier(0.5f64) < 1.0);
    }

    #[test]
    fn separable_derivatives_match_differences() {
        let (d, tg) = setup();
        let k = KappaField::Separable {
            spatial: Box::new(KappaField::SinMode {
                amplitude: 0.2,
                mode: [1, 0],
            }),
            profile: TimeProfile {
                offset: 1.0,
                slope: 0.3,
                amplitude: 0.5,
                omega: 2.0,
            },
        };
        let s = k.sample(&d, &tg).unwrap();
        let g = KappaField::Grid(s.value_series(&d, &tg))
            .sample(&d, &tg)
            .unwrap();
        let err = (&g.dt - &s.dt).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 5e-3, "{err}");
        let err2 = (&g.dtt - &s.dtt)
            .iter()
            .skip(16)
            .take(16 * 38)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err2 < 5e-3, "{err2}");
    }

    #[test]
    fn basis_expand_project_and_adjoint() {
        let (d, tg) = setup();
        let b = build_basis(&d).unwrap();
        let kb = KappaBasis::new(&b, 4, 2).unwrap();
        assert_eq!(kb.len(), 12);
        let c: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).cos()).collect();
        let field = kb.expand(&c, &d, &tg).unwrap();
        let back = kb.project(&field).unwrap();
        for (a, e) in back.iter().zip(&c) {
            assert!((a - e).abs() < 1e-10);
        }
        let y = GridSeries::from_fn(d.clone(), tg, |x, t| (x[0] * t).sin());
        let lhs = field.inner(&y);
        let rhs: f64 = kb.adjoint(&y).iter().zip(&c).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
        // sin x is the first basis function with unit coefficient
        let sinx = KappaField::SinMode {
            amplitude: 0.1,
            mode: [1, 0],
        }
        .sample(&d, &tg)
        .unwrap();
        let p = KappaBasis::new(&b, 3, 0)
            .unwrap()
            .project(&sinx.value_series(&d, &tg))
            .unwrap();
        assert!((p[0] - 0.1).abs() < 1e-12 && p[1].abs() < 1e-12 && p[2].abs() < 1e-12);
    }

    #[test]
    fn legendre_time_derivatives() {
        let (d, tg) = setup();
        let b = build_basis(&d).unwrap();
        let kb = KappaBasis::new(&b, 1, 3).unwrap();
        let k = KappaField::Coefficients {
            basis: kb,
            coeffs: vec![0.0, 0.0, 0.0, 1.0],
        };
        let s = k.sample(&d, &tg).unwrap();
        // P3(tau) = (5 tau^3 - 3 tau)/2, tau = t - 1 on (0, 2)
        let n = 13;
        let t = tg.time(n);
        let tau = t - 1.0;
        let psi = d.coordinate(0, 4).sin();
        assert!((s.value[[n, 4]] - psi * (5.0 * tau.powi(3) - 3.0 * tau) / 2.0).abs() < 1e-12);
        assert!((s.dt[[n, 4]] - psi * (15.0 * tau * tau - 3.0) / 2.0).abs() < 1e-12);
        assert!((s.dtt[[n, 4]] - psi * 15.0 * tau).abs() < 1e-12);
    }

    #[test]
    fn bounds_and_errors() {
        let (d, tg) = setup();
        assert!(KappaField::Constant(0.6)
            .check_bounded(&d, &tg, 0.5)
            .is_err());
        assert!(KappaField::Constant(0.4)
            .check_bounded(&d, &tg, 0.5)
            .is_ok());
        let bad = KappaField::Separable {
            spatial: Box::new(KappaField::Grid(GridSeries::zeros(d.clone(), tg))),
            profile: TimeProfile {
                offset: 1.0,
                slope: 0.0,
                amplitude: 0.0,
                omega: 0.0,
            },
        };
        assert!(bad.sample(&d, &tg).is_err());
        assert!(KappaField::Constant(0.0).sample(&d, &tg).unwrap().is_zero());
    }

    #[test]
    fn sum_adds_parts() {
        let (d, tg) = setup();
        let a = KappaField::SinMode {
            amplitude: 0.1,
            mode: [1, 1],
        };
        let b = KappaField::Separable {
            spatial: Box::new(KappaField::Constant(0.2)),
            profile: TimeProfile {
                offset: 0.0,
                slope: 1.0,
                amplitude: 0.0,
                omega: 0.0,
            },
        };
        let sum = KappaField::Sum(vec![a.clone(), b.clone()])
            .sample(&d, &tg)
            .unwrap();
        let (sa, sb) = (a.sample(&d, &tg).unwrap(), b.sample(&d, &tg).unwrap());
        assert_eq!(sum.value, &sa.value + &sb.value);
        assert_eq!(sum.dt, &sa.dt + &sb.dt);
    }
}
