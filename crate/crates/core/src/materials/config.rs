use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::builtin::{holzapfel_ogden_defaults, make_holzapfel_ogden, make_mooney_rivlin, make_neo_hookean, make_stvk};
use super::{with_fibers, Fibers, Kinematics, LameParams, MaterialError, MaterialModel, MooneyRivlinParams, ParamSpec};
use crate::expr::{parse_scalar, Expr, Scope, TensorExpr, Value};

/// JSON material description: either a built-in name or a strain-energy expression.
///
/// ```json
/// { "name": "soft", "builtin": "neo-hookean", "params": { "E": 3000, "nu": 0.3 } }
/// { "name": "mine", "expression": "mu/2*(tr(C)-3) - mu*ln(J) + lambda/2*ln(J)^2",
///   "params": { "mu": 1153.8, "lambda": 1730.8 } }
/// ```
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub expression: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub fibers: Option<FiberConfig>,
    #[serde(default)]
    pub linear_log_volume: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberConfig {
    pub f0: [f64; 3],
    pub s0: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub enum MaterialSource<'a> {
    Builtin(&'a str),
    Expression(&'a str),
}

/// Canonical built-in name for an accepted alias.
pub(crate) fn builtin_name(s: &str) -> Option<&'static str> {
    Some(match s.to_ascii_lowercase().replace('_', "-").as_str() {
        "stvk" | "saint-venant-kirchhoff" => "stvk",
        "nh" | "neo-hookean" | "neohookean" => "neo-hookean",
        "mr" | "mooney-rivlin" | "mooneyrivlin" => "mooney-rivlin",
        "ho" | "holzapfel-ogden" | "holzapfelogden" => "holzapfel-ogden",
        _ => return None,
    })
}

impl MaterialConfig {
    pub fn builtin(name: &str) -> Self {
        Self {
            builtin: Some(name.to_string()),
            ..Default::default()
        }
    }

    pub fn source(&self) -> Result<MaterialSource<'_>, (String, String)> {
        match (&self.builtin, &self.expression) {
            (Some(b), None) => Ok(MaterialSource::Builtin(b)),
            (None, Some(e)) => Ok(MaterialSource::Expression(e)),
            (Some(_), Some(_)) => Err(("expression".into(), "give either 'builtin' or 'expression', not both".into())),
            (None, None) => Err(("builtin".into(), "one of 'builtin' or 'expression' is required".into())),
        }
    }

    /// Builds the model. Errors carry the path of the offending field relative
    /// to this object (for example `params.nu`).
    pub fn build(&self) -> Result<MaterialModel, (String, String)> {
        let fibers = match self.fibers {
            Some(f) => Some(Fibers::new(f.f0, f.s0).map_err(|e| (fiber_path(&e), e.to_string()))?),
            None => None,
        };
        let model = match self.source()? {
            MaterialSource::Builtin(b) => self.build_builtin(b, fibers)?,
            MaterialSource::Expression(src) => self.build_expression(src, fibers)?,
        };
        Ok(model)
    }

    fn take(&self, allowed: &[&str]) -> Result<(), (String, String)> {
        for k in self.params.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err((
                    format!("params.{k}"),
                    format!("unknown parameter; expected one of {}", allowed.join(", ")),
                ));
            }
        }
        Ok(())
    }

    fn build_builtin(&self, b: &str, fibers: Option<Fibers>) -> Result<MaterialModel, (String, String)> {
        let name = builtin_name(b).ok_or_else(|| ("builtin".to_string(), MaterialError::UnknownBuiltin(b.into()).to_string()))?;
        let p = &self.params;
        match name {
            "stvk" | "neo-hookean" => {
                self.take(&["E", "nu", "mu", "lambda"])?;
                let lame = match (p.get("E"), p.get("nu"), p.get("mu"), p.get("lambda")) {
                    (Some(&e), Some(&nu), None, None) => LameParams::from_young_poisson(e, nu),
                    (None, None, Some(&mu), Some(&l)) => LameParams::new(mu, l),
                    (None, None, None, None) => LameParams::from_young_poisson(3000.0, 0.3),
                    _ => {
                        return Err((
                            "params".into(),
                            "give either {E, nu} or {mu, lambda}".into(),
                        ))
                    }
                }
                .map_err(|e| (param_path(&e), e.to_string()))?;
                Ok(if name == "stvk" {
                    make_stvk(lame)
                } else {
                    make_neo_hookean(lame)
                })
            }
            "mooney-rivlin" => {
                self.take(&["C01", "C10", "K"])?;
                let d = MooneyRivlinParams::default();
                let mr = MooneyRivlinParams {
                    c01: *p.get("C01").unwrap_or(&d.c01),
                    c10: *p.get("C10").unwrap_or(&d.c10),
                    k: *p.get("K").unwrap_or(&d.k),
                    linear_log_volume: self.linear_log_volume,
                };
                make_mooney_rivlin(mr).map_err(|e| (param_path(&e), e.to_string()))
            }
            _ => {
                let keys = ["a", "b", "a_f", "b_f", "a_s", "b_s", "a_fs", "b_fs", "kappa"];
                self.take(&keys)?;
                let mut h = holzapfel_ogden_defaults();
                for (k, v) in p {
                    *match k.as_str() {
                        "a" => &mut h.a,
                        "b" => &mut h.b,
                        "a_f" => &mut h.a_f,
                        "b_f" => &mut h.b_f,
                        "a_s" => &mut h.a_s,
                        "b_s" => &mut h.b_s,
                        "a_fs" => &mut h.a_fs,
                        "b_fs" => &mut h.b_fs,
                        _ => &mut h.kappa,
                    } = *v;
                }
                let fib = match fibers {
                    Some(f) => f,
                    None => Fibers::new([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).expect("unit"),
                };
                make_holzapfel_ogden(h, fib).map_err(|e| (param_path(&e), e.to_string()))
            }
        }
        .map(|m| match &self.name {
            Some(n) => MaterialModel { name: n.clone(), ..m },
            None => m,
        })
    }

    fn build_expression(&self, src: &str, fibers: Option<Fibers>) -> Result<MaterialModel, (String, String)> {
        let k = Kinematics::new();
        let mut scope = Scope::new()
            .with("F", Value::Tensor(k.f.clone()))
            .with("I", Value::Tensor(TensorExpr::identity(3)))
            .with("C", Value::Tensor(k.c.clone()))
            .with("E", Value::Tensor(k.e.clone()))
            .with("J", Value::Scalar(k.j.clone()));
        if let Some(f) = fibers {
            scope.insert("f0", Value::Tensor(TensorExpr::column(&f.f0)));
            scope.insert("s0", Value::Tensor(TensorExpr::column(&f.s0)));
        }
        let mut schema = Vec::new();
        for (name, &v) in &self.params {
            if scope.get(name).is_some() {
                return Err((format!("params.{name}"), "parameter name shadows a built-in symbol".into()));
            }
            scope.insert(name, Value::Scalar(Expr::param(name)));
            schema.push(ParamSpec::new(name, "", v));
        }
        let psi = parse_scalar(src, &scope).map_err(|e| ("expression".to_string(), e.to_string()))?;
        let name = self.name.clone().unwrap_or_else(|| "expression".into());
        with_fibers(&name, psi, schema, fibers).map_err(|e| (param_path(&e), e.to_string()))
    }
}

fn param_path(e: &MaterialError) -> String {
    match e {
        MaterialError::InvalidParameter { name, .. } | MaterialError::MissingParameter(name) => format!("params.{name}"),
        MaterialError::Incompressible(_) => "params.nu".into(),
        MaterialError::FiberNotUnit { .. } => fiber_path(e),
        _ => "params".into(),
    }
}

fn fiber_path(e: &MaterialError) -> String {
    match e {
        MaterialError::FiberNotUnit { name, .. } => format!("fibers.{name}"),
        _ => "fibers".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> MaterialConfig {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn expression_matches_builtin_neo_hookean() {
        let user = cfg(r#"{"expression": "mu/2*(tr(C)-3) - mu*ln(J) + lambda/2*ln(J)**2",
                           "params": {"mu": 1153.8461538461538, "lambda": 1730.7692307692307}}"#)
        .build()
        .unwrap();
        let builtin = cfg(r#"{"builtin": "nh", "params": {"E": 3000, "nu": 0.3}}"#).build().unwrap();
        let f = [1.1, 0.05, 0.0, -0.02, 0.95, 0.1, 0.0, 0.03, 1.05];
        let (a, b) = (user.kernel().unwrap().eval(&f).unwrap(), builtin.kernel().unwrap().eval(&f).unwrap());
        assert!((a.0 - b.0).abs() < 1e-10 * b.0.abs());
        for (x, y) in a.1.iter().zip(&b.1) {
            assert!((x - y).abs() < 1e-9 * y.abs().max(1.0));
        }
    }

    #[test]
    fn errors_name_the_field() {
        let (path, msg) = cfg(r#"{"builtin": "stvk", "params": {"E": 3000, "nu": 0.5}}"#).build().unwrap_err();
        assert_eq!(path, "params.nu");
        assert!(msg.contains("incompressible"));
        let (path, _) = cfg(r#"{"builtin": "stvk", "params": {"G": 1}}"#).build().unwrap_err();
        assert_eq!(path, "params.G");
        let (path, _) = cfg(r#"{"builtin": "rubber"}"#).build().unwrap_err();
        assert_eq!(path, "builtin");
        let (path, msg) = cfg(r#"{"expression": "q * tr(C)"}"#).build().unwrap_err();
        assert_eq!(path, "expression");
        assert!(msg.contains("'q'"));
        let (path, _) = cfg(r#"{"builtin": "ho", "fibers": {"f0": [1, 1, 0], "s0": [0, 0, 1]}}"#)
            .build()
            .unwrap_err();
        assert_eq!(path, "fibers.f0");
    }

    #[test]
    fn fiber_symbols_available_to_expressions() {
        let m = cfg(r#"{"expression": "k * (dot(transpose(f0), C * f0) - 1)^2", "params": {"k": 2},
                        "fibers": {"f0": [0, 0, 1], "s0": [1, 0, 0]}}"#)
        .build()
        .unwrap_or_else(|e| panic!("{e:?}"));
        // stretch 1.1 along z: I4 = 1.21
        let (psi, _, _) = m
            .kernel()
            .unwrap()
            .eval(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.1])
            .unwrap();
        assert!((psi - 2.0 * 0.21f64.powi(2)).abs() < 1e-14);
    }
}
