//! Parametrizations of the unit sphere `S^{n-1}` by points of a unit cube.
//!
//! `n = 1` uses a single parameter: values below 1/2 select `-1`, the rest
//! `+1`. `n = 2` uses the angle `2πp`. Higher dimensions use hyperspherical
//! angles with the last one periodic.

use std::f64::consts::PI;

use crate::sampling::QmcStream;

pub fn param_dim(n: usize) -> usize {
    n.saturating_sub(1).max(1)
}

pub fn direction(n: usize, params: &[f64]) -> Vec<f64> {
    match n {
        1 => vec![if params[0] < 0.5 { -1.0 } else { 1.0 }],
        2 => {
            let a = 2.0 * PI * params[0];
            vec![a.cos(), a.sin()]
        }
        _ => {
            let mut out = vec![0.0; n];
            let mut sin_prod = 1.0;
            for k in 0..n - 1 {
                let a = if k == n - 2 {
                    2.0 * PI * params[k]
                } else {
                    PI * params[k]
                };
                out[k] = sin_prod * a.cos();
                sin_prod *= a.sin();
            }
            out[n - 1] = sin_prod;
            out
        }
    }
}

/// Keeps parameters inside the cube: the periodic angle wraps, polar
/// angles clamp.
pub fn wrap_params(n: usize, params: &mut [f64]) {
    let last = params.len() - 1;
    for (k, p) in params.iter_mut().enumerate() {
        if n >= 2 && k == last {
            *p = p.rem_euclid(1.0);
        } else {
            *p = p.clamp(0.0, 1.0);
        }
    }
}

/// Deterministic parameter grid of roughly `count` directions.
pub fn param_grid(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![0.25], vec![0.75]],
        2 => (0..count.max(1))
            .map(|k| vec![k as f64 / count.max(1) as f64])
            .collect(),
        _ => {
            let s = QmcStream::new(n - 1, 0x5eed);
            (0..count.max(1) as u64).map(|i| s.point(i)).collect()
        }
    }
}

pub fn direction_grid(n: usize, count: usize) -> Vec<Vec<f64>> {
    param_grid(n, count)
        .iter()
        .map(|p| direction(n, p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::norm_sq;

    #[test]
    fn directions_are_unit() {
        for n in 1..=4 {
            for p in param_grid(n, 50) {
                let d = direction(n, &p);
                assert_eq!(d.len(), n);
                assert!((norm_sq(&d) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn one_dimensional_grid_has_both_signs() {
        let g = direction_grid(1, 10);
        assert_eq!(g, vec![vec![-1.0], vec![1.0]]);
    }

    #[test]
    fn wrapping() {
        let mut p = vec![1.25];
        wrap_params(2, &mut p);
        assert!((p[0] - 0.25).abs() < 1e-15);
        let mut q = vec![1.5, -0.25];
        wrap_params(3, &mut q);
        assert_eq!(q[0], 1.0);
        assert!((q[1] - 0.75).abs() < 1e-15);
    }
}
