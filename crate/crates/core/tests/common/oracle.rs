//! Finite-difference curvature pipeline sharing nothing with the jet engine:
//! metric values from plain expression evaluation, derivatives from
//! Richardson-extrapolated central stencils, curvature assembled by the
//! product rule.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, Array3, Array4, Array5};

use warpcurv::geometry::{CurvaturePack, MetricField};

/// Step sizes per derivative order; the stencil width grows with the order so
/// roundoff stays below truncation error.
pub const STEPS: [f64; 3] = [1e-3, 5e-3, 1e-2];

pub struct FdPack {
    pub g: Array2<f64>,
    pub g_inv: Array2<f64>,
    pub gamma: Array3<f64>,
    pub riemann: Array4<f64>,
    pub ricci: Array2<f64>,
    pub scalar: f64,
    pub d_scalar: Array1<f64>,
    pub nabla_ricci: Array3<f64>,
    pub weyl: Array4<f64>,
    pub cotton: Array3<f64>,
    pub weyl_div: Array3<f64>,
}

fn stencil(m: &MetricField, p: &[f64], dirs: &[usize], h: f64) -> Array2<f64> {
    let n = p.len();
    let k = dirs.len();
    let mut acc = Array2::zeros((n, n));
    for mask in 0..(1u32 << k) {
        let mut q = p.to_vec();
        let mut sign = 1.0;
        for (t, &d) in dirs.iter().enumerate() {
            if mask & (1 << t) != 0 {
                q[d] -= h;
                sign = -sign;
            } else {
                q[d] += h;
            }
        }
        acc = acc + m.values(&q).expect("oracle point evaluable") * sign;
    }
    acc / (2.0 * h).powi(k as i32)
}

/// Two rounds of Richardson extrapolation over `h, h/2, h/4`, cancelling the
/// `h²` and `h⁴` error terms.
fn derivative(m: &MetricField, p: &[f64], dirs: &[usize]) -> Array2<f64> {
    let h = STEPS[dirs.len() - 1];
    let d0 = stencil(m, p, dirs, h);
    let d1 = stencil(m, p, dirs, h / 2.0);
    let d2 = stencil(m, p, dirs, h / 4.0);
    let r1 = (&d1 * 4.0 - &d0) / 3.0;
    let r2 = (&d2 * 4.0 - &d1) / 3.0;
    (r2 * 16.0 - r1) / 15.0
}

fn inverse(g: &Array2<f64>) -> Array2<f64> {
    let n = g.nrows();
    let inv = DMatrix::from_fn(n, n, |i, j| g[[i, j]])
        .try_inverse()
        .expect("oracle metric invertible");
    Array2::from_shape_fn((n, n), |(i, j)| inv[(i, j)])
}

pub fn fd_pack(m: &MetricField, p: &[f64]) -> FdPack {
    let n = p.len();
    let nf = n as f64;
    let g = m.values(p).unwrap();
    let a = inverse(&g);

    let mut dg: Array3<f64> = Array3::zeros((n, n, n));
    let mut ddg: Array4<f64> = Array4::zeros((n, n, n, n));
    let mut dddg: Array5<f64> = Array5::zeros((n, n, n, n, n));
    for x in 0..n {
        dg.slice_mut(ndarray::s![x, .., ..]).assign(&derivative(m, p, &[x]));
        for y in x..n {
            let d2 = derivative(m, p, &[x, y]);
            ddg.slice_mut(ndarray::s![x, y, .., ..]).assign(&d2);
            ddg.slice_mut(ndarray::s![y, x, .., ..]).assign(&d2);
            for z in y..n {
                let d3 = derivative(m, p, &[x, y, z]);
                for (u, v, w) in [(x, y, z), (x, z, y), (y, x, z), (y, z, x), (z, x, y), (z, y, x)] {
                    dddg.slice_mut(ndarray::s![u, v, w, .., ..]).assign(&d3);
                }
            }
        }
    }

    let mm = |l: &Array2<f64>, r: &Array2<f64>| l.dot(r);
    let dgm = |x: usize| dg.slice(ndarray::s![x, .., ..]).to_owned();
    let ddgm = |x: usize, y: usize| ddg.slice(ndarray::s![x, y, .., ..]).to_owned();
    let da: Vec<Array2<f64>> = (0..n).map(|x| -mm(&mm(&a, &dgm(x)), &a)).collect();
    let mut dda: Array4<f64> = Array4::zeros((n, n, n, n));
    for x in 0..n {
        for y in 0..n {
            let inner = mm(&mm(&dgm(x), &a), &dgm(y)) + mm(&mm(&dgm(y), &a), &dgm(x)) - ddgm(x, y);
            dda.slice_mut(ndarray::s![x, y, .., ..]).assign(&mm(&mm(&a, &inner), &a));
        }
    }

    // Christoffel symbols of the first kind and their derivatives
    let g1 = Array3::from_shape_fn((n, n, n), |(l, i, j)| {
        0.5 * (dg[[i, j, l]] + dg[[j, i, l]] - dg[[l, i, j]])
    });
    let dg1 = Array4::from_shape_fn((n, n, n, n), |(q, l, i, j)| {
        0.5 * (ddg[[q, i, j, l]] + ddg[[q, j, i, l]] - ddg[[q, l, i, j]])
    });
    let ddg1 = Array5::from_shape_fn((n, n, n, n, n), |(r, q, l, i, j)| {
        0.5 * (dddg[[r, q, i, j, l]] + dddg[[r, q, j, i, l]] - dddg[[r, q, l, i, j]])
    });

    let gamma = Array3::from_shape_fn((n, n, n), |(k, i, j)| {
        (0..n).map(|l| a[[k, l]] * g1[[l, i, j]]).sum::<f64>()
    });
    let dgamma = Array4::from_shape_fn((n, n, n, n), |(q, k, i, j)| {
        (0..n)
            .map(|l| da[q][[k, l]] * g1[[l, i, j]] + a[[k, l]] * dg1[[q, l, i, j]])
            .sum::<f64>()
    });
    let ddgamma = Array5::from_shape_fn((n, n, n, n, n), |(r, q, k, i, j)| {
        (0..n)
            .map(|l| {
                dda[[r, q, k, l]] * g1[[l, i, j]]
                    + da[q][[k, l]] * dg1[[r, l, i, j]]
                    + da[r][[k, l]] * dg1[[q, l, i, j]]
                    + a[[k, l]] * ddg1[[r, q, l, i, j]]
            })
            .sum::<f64>()
    });

    let riemann = Array4::from_shape_fn((n, n, n, n), |(l, i, j, k)| {
        let mut v = dgamma[[i, l, j, k]] - dgamma[[j, l, i, k]];
        for m in 0..n {
            v += gamma[[l, i, m]] * gamma[[m, j, k]] - gamma[[l, j, m]] * gamma[[m, i, k]];
        }
        v
    });
    let mut driemann: Array5<f64> = Array5::zeros((n, n, n, n, n));
    for q in 0..n {
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut v = ddgamma[[q, i, l, j, k]] - ddgamma[[q, j, l, i, k]];
                        for m in 0..n {
                            v += dgamma[[q, l, i, m]] * gamma[[m, j, k]]
                                + gamma[[l, i, m]] * dgamma[[q, m, j, k]]
                                - dgamma[[q, l, j, m]] * gamma[[m, i, k]]
                                - gamma[[l, j, m]] * dgamma[[q, m, i, k]];
                        }
                        driemann[[q, l, i, j, k]] = v;
                    }
                }
            }
        }
    }

    let ricci = Array2::from_shape_fn((n, n), |(j, k)| (0..n).map(|i| riemann[[i, i, j, k]]).sum::<f64>());
    let dricci = Array3::from_shape_fn((n, n, n), |(q, j, k)| {
        (0..n).map(|i| driemann[[q, i, i, j, k]]).sum::<f64>()
    });
    let scalar: f64 = (0..n)
        .flat_map(|j| (0..n).map(move |k| (j, k)))
        .map(|(j, k)| a[[j, k]] * ricci[[j, k]])
        .sum();
    let d_scalar = Array1::from_shape_fn(n, |q| {
        let mut v = 0.0;
        for j in 0..n {
            for k in 0..n {
                v += da[q][[j, k]] * ricci[[j, k]] + a[[j, k]] * dricci[[q, j, k]];
            }
        }
        v
    });
    let nabla_ricci = Array3::from_shape_fn((n, n, n), |(k, i, j)| {
        let mut v = dricci[[k, i, j]];
        for l in 0..n {
            v -= gamma[[l, k, i]] * ricci[[l, j]] + gamma[[l, k, j]] * ricci[[i, l]];
        }
        v
    });

    let mut cotton = Array3::zeros((n, n, n));
    if n >= 2 {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    cotton[[i, j, k]] = nabla_ricci[[k, i, j]] - nabla_ricci[[i, k, j]]
                        - (d_scalar[k] * g[[i, j]] - d_scalar[i] * g[[k, j]]) / (2.0 * (nf - 1.0));
                }
            }
        }
    }

    let (weyl, weyl_div) = if n >= 4 {
        // all-lower Riemann in standard slot order: R_abcd = g_ae R^e_{cdb}
        let rlow = Array4::from_shape_fn((n, n, n, n), |(a_, b, c, d)| {
            (0..n).map(|e| g[[a_, e]] * riemann[[e, c, d, b]]).sum::<f64>()
        });
        let drlow = Array5::from_shape_fn((n, n, n, n, n), |(q, a_, b, c, d)| {
            (0..n)
                .map(|e| dg[[q, a_, e]] * riemann[[e, c, d, b]] + g[[a_, e]] * driemann[[q, e, c, d, b]])
                .sum::<f64>()
        });
        let s1 = 1.0 / (nf - 2.0);
        let s2 = 1.0 / ((nf - 1.0) * (nf - 2.0));
        let weyl = Array4::from_shape_fn((n, n, n, n), |(a_, b, c, d)| {
            rlow[[a_, b, c, d]]
                - s1 * (g[[a_, c]] * ricci[[b, d]] - g[[a_, d]] * ricci[[b, c]]
                    - g[[b, c]] * ricci[[a_, d]]
                    + g[[b, d]] * ricci[[a_, c]])
                + s2 * scalar * (g[[a_, c]] * g[[b, d]] - g[[a_, d]] * g[[b, c]])
        });
        let dweyl = Array5::from_shape_fn((n, n, n, n, n), |(q, a_, b, c, d)| {
            let pr = |x: f64, dx: f64, y: f64, dy: f64| dx * y + x * dy;
            let gq = |u: usize, v: usize| dg[[q, u, v]];
            let rq = |u: usize, v: usize| dricci[[q, u, v]];
            drlow[[q, a_, b, c, d]]
                - s1 * (pr(g[[a_, c]], gq(a_, c), ricci[[b, d]], rq(b, d))
                    - pr(g[[a_, d]], gq(a_, d), ricci[[b, c]], rq(b, c))
                    - pr(g[[b, c]], gq(b, c), ricci[[a_, d]], rq(a_, d))
                    + pr(g[[b, d]], gq(b, d), ricci[[a_, c]], rq(a_, c)))
                + s2 * d_scalar[q] * (g[[a_, c]] * g[[b, d]] - g[[a_, d]] * g[[b, c]])
                + s2 * scalar
                    * (pr(g[[a_, c]], gq(a_, c), g[[b, d]], gq(b, d))
                        - pr(g[[a_, d]], gq(a_, d), g[[b, c]], gq(b, c)))
        });
        let div = Array3::from_shape_fn((n, n, n), |(i, j, k)| {
            let mut acc = 0.0;
            for a_ in 0..n {
                for e in 0..n {
                    let mut nab = dweyl[[e, a_, j, k, i]];
                    for m in 0..n {
                        nab -= gamma[[m, e, a_]] * weyl[[m, j, k, i]]
                            + gamma[[m, e, j]] * weyl[[a_, m, k, i]]
                            + gamma[[m, e, k]] * weyl[[a_, j, m, i]]
                            + gamma[[m, e, i]] * weyl[[a_, j, k, m]];
                    }
                    acc += a[[a_, e]] * nab;
                }
            }
            acc
        });
        (weyl, div)
    } else {
        (Array4::zeros((n, n, n, n)), Array3::zeros((n, n, n)))
    };

    FdPack {
        g,
        g_inv: a,
        gamma,
        riemann,
        ricci,
        scalar,
        d_scalar,
        nabla_ricci,
        weyl,
        cotton,
        weyl_div,
    }
}

/// Worst relative mismatch per component family, each measured against the
/// family's largest oracle entry (floored at 1).
pub fn compare(pack: &CurvaturePack, fd: &FdPack) -> Vec<(&'static str, f64)> {
    fn rel<'a>(
        a: impl IntoIterator<Item = &'a f64>,
        b: impl IntoIterator<Item = &'a f64> + Clone,
    ) -> f64 {
        let scale = b.clone().into_iter().fold(1.0f64, |m, v| m.max(v.abs()));
        super::max_abs_diff(a, b) / scale
    }
    vec![
        ("g", rel(&pack.g, &fd.g)),
        ("g_inv", rel(&pack.g_inv, &fd.g_inv)),
        ("gamma", rel(&pack.gamma, &fd.gamma)),
        ("riemann", rel(&pack.riemann, &fd.riemann)),
        ("ricci", rel(&pack.ricci, &fd.ricci)),
        ("scalar", rel([&pack.scalar], [&fd.scalar])),
        ("d_scalar", rel(&pack.d_scalar, &fd.d_scalar)),
        ("nabla_ricci", rel(&pack.nabla_ricci, &fd.nabla_ricci)),
        ("weyl", rel(&pack.weyl, &fd.weyl)),
        ("cotton", rel(&pack.cotton, &fd.cotton)),
        ("weyl_div", rel(&pack.weyl_div, &fd.weyl_div)),
    ]
}
