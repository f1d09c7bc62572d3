//! Manufactured and Taylor-Green solutions checked against hyper-dual
//! automatic differentiation of independently written formulas.

use lpsflow::cases::{
    mms_boundary, mms_exact, mms_forcing, mms_pressure_mean, mms_pressure_raw, mms_velocity,
    tgv_exact, tgv_exact_energy, tgv_initial,
};
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

/// `v + a e1 + b e2 + c e1 e2` with `e1^2 = e2^2 = 0`.
#[derive(Debug, Clone, Copy)]
struct Hd {
    v: f64,
    a: f64,
    b: f64,
    c: f64,
}

impl Hd {
    fn c(v: f64) -> Self {
        Self {
            v,
            a: 0.0,
            b: 0.0,
            c: 0.0,
        }
    }

    /// Seed for first and second derivatives along one variable.
    fn var(v: f64) -> Self {
        Self {
            v,
            a: 1.0,
            b: 1.0,
            c: 0.0,
        }
    }

    fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        Self {
            v: f,
            a: df * self.a,
            b: df * self.b,
            c: df * self.c + d2f * self.a * self.b,
        }
    }

    fn sin(self) -> Self {
        self.chain(self.v.sin(), self.v.cos(), -self.v.sin())
    }

    fn cos(self) -> Self {
        self.chain(self.v.cos(), -self.v.sin(), -self.v.cos())
    }

    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
}

impl Add for Hd {
    type Output = Hd;
    fn add(self, o: Hd) -> Hd {
        Hd {
            v: self.v + o.v,
            a: self.a + o.a,
            b: self.b + o.b,
            c: self.c + o.c,
        }
    }
}

impl Sub for Hd {
    type Output = Hd;
    fn sub(self, o: Hd) -> Hd {
        self + (-o)
    }
}

impl Neg for Hd {
    type Output = Hd;
    fn neg(self) -> Hd {
        Hd {
            v: -self.v,
            a: -self.a,
            b: -self.b,
            c: -self.c,
        }
    }
}

impl Mul for Hd {
    type Output = Hd;
    fn mul(self, o: Hd) -> Hd {
        Hd {
            v: self.v * o.v,
            a: self.v * o.a + self.a * o.v,
            b: self.v * o.b + self.b * o.v,
            c: self.v * o.c + self.a * o.b + self.b * o.a + self.c * o.v,
        }
    }
}

impl Mul<Hd> for f64 {
    type Output = Hd;
    fn mul(self, o: Hd) -> Hd {
        Hd::c(self) * o
    }
}

type Field = fn(Hd, Hd, Hd) -> [Hd; 3];

/// Derivatives of `(u1, u2, p)` at a point: value, d/dx, d/dy, d/dt and
/// the second derivatives d2/dx2, d2/dy2.
struct Jet {
    val: [f64; 3],
    dx: [f64; 3],
    dy: [f64; 3],
    dt: [f64; 3],
    dxx: [f64; 3],
    dyy: [f64; 3],
}

fn jet(f: impl Fn(Hd, Hd, Hd) -> [Hd; 3], x: f64, y: f64, t: f64) -> Jet {
    let fx = f(Hd::var(x), Hd::c(y), Hd::c(t));
    let fy = f(Hd::c(x), Hd::var(y), Hd::c(t));
    let ft = f(Hd::c(x), Hd::c(y), Hd::var(t));
    Jet {
        val: fx.map(|h| h.v),
        dx: fx.map(|h| h.a),
        dy: fy.map(|h| h.a),
        dt: ft.map(|h| h.a),
        dxx: fx.map(|h| h.c),
        dyy: fy.map(|h| h.c),
    }
}

/// `du/dt - nu lap u + (u.grad) u + grad p` and `div u`.
fn navier_stokes_residual(j: &Jet, nu: f64) -> ([f64; 2], f64) {
    let mut r = [0.0; 2];
    for c in 0..2 {
        r[c] = j.dt[c] - nu * (j.dxx[c] + j.dyy[c])
            + j.val[0] * j.dx[c]
            + j.val[1] * j.dy[c]
            + if c == 0 { j.dx[2] } else { j.dy[2] };
    }
    (r, j.dx[0] + j.dy[1])
}

// the published pair with the sign of the second velocity component flipped,
// which makes it solenoidal
fn mms(x: Hd, y: Hd, t: Hd) -> [Hd; 3] {
    let one_x = Hd::c(1.0) - x;
    let yt = y + t;
    [
        one_x.sin() * yt.sin(),
        -(one_x.cos() * yt.cos()),
        -(one_x.cos() * yt.sin()),
    ]
}

fn sample_points() -> Vec<(f64, f64, f64)> {
    let mut v = Vec::new();
    for &x in &[-1.0, -0.63, 0.0, 0.41, 0.97] {
        for &y in &[-0.88, -0.2, 0.5, 1.0] {
            for &t in &[0.0, 0.3, 1.7] {
                v.push((x, y, t));
            }
        }
    }
    v
}

#[test]
fn mms_forcing_matches_autodiff() {
    let f: Field = mms;
    for nu in [1.0, 1e-2, 1e-4] {
        for (x, y, t) in sample_points() {
            let j = jet(f, x, y, t);
            let (r, div) = navier_stokes_residual(&j, nu);
            let got = mms_forcing(x, y, t, nu);
            assert!(div.abs() < 1e-14);
            for c in 0..2 {
                assert!((got[c] - r[c]).abs() < 1e-12, "nu {nu} at ({x},{y},{t})");
            }
        }
    }
}

#[test]
fn mms_fields_match_autodiff() {
    for (x, y, t) in sample_points() {
        let j = jet(mms, x, y, t);
        let (u, g) = mms_velocity(x, y, t);
        for c in 0..2 {
            assert!((u[c] - j.val[c]).abs() < 1e-15);
            assert!((g[c][0] - j.dx[c]).abs() < 1e-14);
            assert!((g[c][1] - j.dy[c]).abs() < 1e-14);
        }
        assert!((mms_pressure_raw(x, y, t) - j.val[2]).abs() < 1e-15);
        let (ue, pe) = mms_exact(x, y, t);
        assert_eq!(ue, u);
        assert!((pe - (j.val[2] - mms_pressure_mean(t))).abs() < 1e-14);
        assert_eq!(mms_boundary(x, y, t), u);
    }
}

fn simpson_2d(f: impl Fn(f64, f64) -> f64, lo: [f64; 2], hi: [f64; 2], n: usize) -> f64 {
    let w = |i: usize| {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let h = [(hi[0] - lo[0]) / n as f64, (hi[1] - lo[1]) / n as f64];
    let mut s = 0.0;
    for j in 0..=n {
        for i in 0..=n {
            s += w(i) * w(j) * f(lo[0] + i as f64 * h[0], lo[1] + j as f64 * h[1]);
        }
    }
    s * h[0] * h[1] / 9.0
}

#[test]
fn mms_pressure_mean_by_quadrature() {
    for t in [0.0, 0.4, 1.0, 2.5] {
        let integral = simpson_2d(
            |x, y| mms_pressure_raw(x, y, t),
            [-1.0, -1.0],
            [1.0, 1.0],
            200,
        );
        assert!(
            (integral / 4.0 - mms_pressure_mean(t)).abs() < 1e-9,
            "t = {t}"
        );
        let shifted = simpson_2d(|x, y| mms_exact(x, y, t).1, [-1.0, -1.0], [1.0, 1.0], 200);
        assert!(shifted.abs() < 1e-9);
    }
}

fn tgv_oracle(nu: f64, a: f64, b: f64) -> impl Fn(Hd, Hd, Hd) -> [Hd; 3] {
    move |x, y, t| {
        let k = 2.0 * PI / a;
        let (kx, ky) = (k * x, k * y);
        let dec = (-2.0 * nu * k * k * t).exp();
        let dec2 = (-4.0 * nu * k * k * t).exp();
        [
            b * (kx.cos() * ky.sin() * dec),
            -b * (kx.sin() * ky.cos() * dec),
            -0.25 * b * b * (((2.0 * kx).cos() + (2.0 * ky).cos()) * dec2),
        ]
    }
}

#[test]
fn taylor_green_solves_navier_stokes() {
    for &(nu, a, b) in &[(1e-3, 2.0 * PI, 1.0), (0.1, 1.0, 2.5), (0.0, 3.0, 0.7)] {
        let f = tgv_oracle(nu, a, b);
        for &(x, y, t) in &[(0.1, 0.2, 0.0), (1.3, 0.4, 0.5), (2.9, 2.2, 3.0)] {
            let j = jet(&f, x, y, t);
            let (r, div) = navier_stokes_residual(&j, nu);
            assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12, "{r:?}");
            assert!(div.abs() < 1e-13);
            let ((u, g), p) = tgv_exact(x, y, t, nu, a, b);
            for c in 0..2 {
                assert!((u[c] - j.val[c]).abs() < 1e-14);
                assert!((g[c][0] - j.dx[c]).abs() < 1e-12);
                assert!((g[c][1] - j.dy[c]).abs() < 1e-12);
            }
            assert!((p - j.val[2]).abs() < 1e-14);
        }
    }
}

#[test]
fn taylor_green_energy() {
    for &(nu, a, b) in &[(1e-3, 2.0 * PI, 1.0), (0.05, 1.0, 2.0)] {
        assert!((tgv_exact_energy(0.0, nu, a, b) - b * b * a * a / 4.0).abs() < 1e-12);
        for t in [0.0, 0.5, 2.0] {
            let ke = simpson_2d(
                |x, y| {
                    let ((u, _), _) = tgv_exact(x, y, t, nu, a, b);
                    0.5 * (u[0] * u[0] + u[1] * u[1])
                },
                [0.0, 0.0],
                [a, a],
                64,
            );
            let exact = tgv_exact_energy(t, nu, a, b);
            assert!((ke - exact).abs() < 1e-10 * exact, "t = {t}");
        }
    }
    assert_eq!(
        tgv_exact_energy(0.0, 0.0, 2.0, 1.0),
        tgv_exact_energy(7.0, 0.0, 2.0, 1.0)
    );
    let ((u0, _), p0) = tgv_exact(0.3, 1.1, 0.0, 0.01, 2.0, 1.5);
    assert_eq!(tgv_initial(0.3, 1.1, 2.0, 1.5), (u0, p0));
}
