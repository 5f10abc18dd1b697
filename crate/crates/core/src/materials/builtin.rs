use serde::{Deserialize, Serialize};

use super::{with_fibers, Fibers, Kinematics, LameParams, MaterialError, MaterialModel, ParamSpec};
use crate::expr::{Expr, TensorExpr};

/// Saint Venant-Kirchhoff: `lambda/2 tr(E)^2 + mu tr(E^2)`.
pub fn make_stvk(p: LameParams) -> MaterialModel {
    let k = Kinematics::new();
    let (lambda, mu) = (Expr::param("lambda"), Expr::param("mu"));
    let tr_e = k.e.trace().expect("3x3");
    let tr_e2 = k.e.matmul(&k.e).expect("3x3").trace().expect("3x3");
    let psi = &lambda * 0.5 * tr_e.powi(2) + &mu * tr_e2;
    with_fibers("stvk", psi, lame_schema(p), None).expect("built-in schema")
}

/// Compressible neo-Hookean: `mu/2 (I_C - 3) - mu ln J + lambda/2 (ln J)^2`.
pub fn make_neo_hookean(p: LameParams) -> MaterialModel {
    let k = Kinematics::new();
    let (lambda, mu) = (Expr::param("lambda"), Expr::param("mu"));
    let ln_j = k.j.ln();
    let psi = &mu * 0.5 * (&k.i1 - 3.0) - &mu * &ln_j + &lambda * 0.5 * ln_j.powi(2);
    with_fibers("neo-hookean", psi, lame_schema(p), None).expect("built-in schema")
}

fn lame_schema(p: LameParams) -> Vec<ParamSpec> {
    vec![
        ParamSpec::new("lambda", "Pa", p.lambda),
        ParamSpec::new("mu", "Pa", p.mu).positive(),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MooneyRivlinParams {
    pub c01: f64,
    pub c10: f64,
    pub k: f64,
    /// Use `K/2 ln J` for the volumetric term instead of `K/2 (ln J)^2`.
    /// This form is stressed at `F = I`.
    #[serde(default)]
    pub linear_log_volume: bool,
}

impl Default for MooneyRivlinParams {
    fn default() -> Self {
        Self {
            c01: 2000.0,
            c10: 100.0,
            k: 1000.0,
            linear_log_volume: false,
        }
    }
}

/// Mooney-Rivlin on the modified invariants `J^(-2/3) I_C` and `J^(-4/3) II_C`.
pub fn make_mooney_rivlin(p: MooneyRivlinParams) -> Result<MaterialModel, MaterialError> {
    let k = Kinematics::new();
    let ln_j = k.j.ln();
    let i1_bar = (&ln_j * (-2.0 / 3.0)).exp() * &k.i1;
    let i2_bar = (&ln_j * (-4.0 / 3.0)).exp() * &k.i2;
    let vol = if p.linear_log_volume { ln_j.clone() } else { ln_j.powi(2) };
    let psi = Expr::param("C01") * (i1_bar - 3.0) + Expr::param("C10") * (i2_bar - 3.0) + Expr::param("K") * 0.5 * vol;
    let name = if p.linear_log_volume {
        "mooney-rivlin-lnj"
    } else {
        "mooney-rivlin"
    };
    with_fibers(
        name,
        psi,
        vec![
            ParamSpec::new("C01", "Pa", p.c01).positive(),
            ParamSpec::new("C10", "Pa", p.c10).positive(),
            ParamSpec::new("K", "Pa", p.k).positive(),
        ],
        None,
    )
}

/// Orthotropic Holzapfel-Ogden parameters. Stiffness-like entries in Pa,
/// exponents dimensionless. A group with zero `a` is dropped from `psi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolzapfelOgdenParams {
    pub a: f64,
    pub b: f64,
    pub a_f: f64,
    pub b_f: f64,
    pub a_s: f64,
    pub b_s: f64,
    pub a_fs: f64,
    pub b_fs: f64,
    pub kappa: f64,
}

/// Passive myocardium values widely used with this model, converted to Pa,
/// with a bulk modulus of 100 kPa.
pub fn holzapfel_ogden_defaults() -> HolzapfelOgdenParams {
    HolzapfelOgdenParams {
        a: 59.0,
        b: 8.023,
        a_f: 18472.0,
        b_f: 16.026,
        a_s: 2481.0,
        b_s: 11.120,
        a_fs: 216.0,
        b_fs: 11.436,
        kappa: 1.0e5,
    }
}

/// `psi_vol + psi_iso` with
/// `psi_vol = kappa/4 (J^2 - 1 - 2 ln J)` and
/// `psi_iso = a/(2b) exp(b (I1 - 3)) + sum_{i=f,s} a_i/(2 b_i) exp(b_i (I4i - 1)^2)
///          + a_fs/(2 b_fs) (exp(b_fs I8fs^2) - 1)`.
///
/// `I1 = tr C` (not the isochoric invariant), and the fiber terms have no
/// tension-only switch, so the energy is smooth everywhere.
pub fn make_holzapfel_ogden(p: HolzapfelOgdenParams, fibers: Fibers) -> Result<MaterialModel, MaterialError> {
    let fibers = Fibers::new(fibers.f0, fibers.s0)?;
    let k = Kinematics::new();
    let f0 = TensorExpr::column(&fibers.f0);
    let s0 = TensorExpr::column(&fibers.s0);
    let i4f = TensorExpr::bilinear(&f0, &k.c, &f0)?;
    let i4s = TensorExpr::bilinear(&s0, &k.c, &s0)?;
    let i8 = TensorExpr::bilinear(&f0, &k.c, &s0)?;

    let mut schema = vec![ParamSpec::new("kappa", "Pa", p.kappa).positive()];
    let mut psi = Expr::param("kappa") * 0.25 * (k.j.powi(2) - 1.0 - 2.0 * k.j.ln());

    let groups: [(&str, &str, f64, f64, Expr); 4] = [
        ("a", "b", p.a, p.b, &k.i1 - 3.0),
        ("a_f", "b_f", p.a_f, p.b_f, (&i4f - 1.0).powi(2)),
        ("a_s", "b_s", p.a_s, p.b_s, (&i4s - 1.0).powi(2)),
        ("a_fs", "b_fs", p.a_fs, p.b_fs, i8.powi(2)),
    ];
    for (an, bn, av, bv, arg) in groups {
        if av == 0.0 {
            continue;
        }
        if av < 0.0 {
            return Err(MaterialError::InvalidParameter {
                name: an.into(),
                value: av,
                reason: "must be non-negative".into(),
            });
        }
        schema.push(ParamSpec::new(an, "Pa", av));
        schema.push(ParamSpec::new(bn, "1", bv).positive());
        let (a, b) = (Expr::param(an), Expr::param(bn));
        let mut term = (&b * arg).exp();
        if an == "a_fs" {
            term = term - 1.0;
        }
        psi = psi + &a / (2.0 * &b) * term;
    }
    with_fibers("holzapfel-ogden", psi, schema, Some(fibers))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::lame_from_young_poisson;

    fn lame() -> LameParams {
        lame_from_young_poisson(3000.0, 0.3).unwrap()
    }

    fn eval_psi(m: &MaterialModel, f: [f64; 9]) -> f64 {
        m.kernel().unwrap().eval(&f).unwrap().0
    }

    #[test]
    fn stvk_hand_value() {
        let m = make_stvk(lame());
        let f = [1.2f64.sqrt(), 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let p = lame();
        let expect = 0.01 * (p.lambda / 2.0 + p.mu);
        let psi = eval_psi(&m, f);
        assert!((psi - expect).abs() < 1e-10 * expect);
        assert!((psi - 20.1923).abs() < 1e-4);
    }

    #[test]
    fn neo_hookean_hand_value() {
        let m = make_neo_hookean(lame());
        let p = lame();
        let l2 = 2f64.ln();
        let expect = 1.5 * p.mu - p.mu * l2 + 0.5 * p.lambda * l2 * l2;
        let psi = eval_psi(&m, [2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((psi - expect).abs() < 1e-9 * expect);
        assert!((psi - 1346.761).abs() < 1e-3);
    }

    #[test]
    fn mooney_rivlin_isochoric_value() {
        let s = 1.2;
        let f = [s, 0.0, 0.0, 0.0, 1.0 / s, 0.0, 0.0, 0.0, 1.0];
        let c = [s * s, 1.0 / (s * s), 1.0];
        let ic: f64 = c.iter().sum();
        let iic = c[0] * c[1] + c[1] * c[2] + c[0] * c[2];
        assert!((ic - 3.134_444_444).abs() < 1e-8);
        let expect = 2000.0 * (ic - 3.0) + 100.0 * (iic - 3.0);
        for lnj in [false, true] {
            let m = make_mooney_rivlin(MooneyRivlinParams {
                linear_log_volume: lnj,
                ..Default::default()
            })
            .unwrap();
            let psi = eval_psi(&m, f);
            assert!((psi - expect).abs() < 1e-9 * expect, "{lnj}: {psi} vs {expect}");
        }
    }

    #[test]
    fn holzapfel_ogden_reference_invariants() {
        let fib = Fibers::new([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap();
        let p = holzapfel_ogden_defaults();
        let m = make_holzapfel_ogden(p, fib).unwrap();
        let id = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let (psi, stress, _) = m.kernel().unwrap().eval(&id).unwrap();
        // J = 1 kills psi_vol, I4 = 1 and I8 = 0 leave a/(2b) + a_f/(2b_f) + a_s/(2b_s)
        let expect = p.a / (2.0 * p.b) + p.a_f / (2.0 * p.b_f) + p.a_s / (2.0 * p.b_s);
        assert!((psi - expect).abs() < 1e-12 * expect);
        // only the full-I1 term stresses the reference: P = a I
        for (k, v) in stress.iter().enumerate() {
            let e = if k % 4 == 0 { p.a } else { 0.0 };
            assert!((v - e).abs() < 1e-10, "P[{k}] = {v}");
        }
    }

    #[test]
    fn holzapfel_ogden_degenerations_drop_parameters() {
        let fib = Fibers::new([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]).unwrap();
        let p = HolzapfelOgdenParams {
            a_s: 0.0,
            b_s: 0.0,
            a_fs: 0.0,
            b_fs: 0.0,
            ..holzapfel_ogden_defaults()
        };
        let m = make_holzapfel_ogden(p, fib).unwrap();
        assert!(m.param("b_s").is_none() && m.param("a_f").is_some());
        let bad = HolzapfelOgdenParams {
            b_f: 0.0,
            ..holzapfel_ogden_defaults()
        };
        assert!(make_holzapfel_ogden(bad, fib).is_err());
    }
}
