use levp_core::engine::{Method, Pick, StrategyConfig, Update};

use crate::error::{usage, Result};

pub const SUPPORTED: &str = "PM, Grad-vecLS, CD-Cyc-{Grad,LS}, GCD-{Grad,LS}-LS, GCD-Grad-Grad, \
SCD-Uni-{Grad,LS,vecLS}, SCD-Grad-{Grad,LS,vecLS}[(t)]";

/// Settings a method name leaves open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodOptions {
    /// Sampling power when the name has no `(t)` suffix.
    pub t: Option<f64>,
    pub k: usize,
    /// Stepsize of fixed-step updates.
    pub gamma: Option<f64>,
    pub with_replacement: bool,
    pub averaged: bool,
    pub allow_naive_batch: bool,
}

impl Default for MethodOptions {
    fn default() -> Self {
        Self {
            t: None,
            k: 1,
            gamma: None,
            with_replacement: true,
            averaged: false,
            allow_naive_batch: false,
        }
    }
}

fn unknown<T>(name: &str) -> Result<T> {
    usage(format!("unknown method `{name}`; supported: {SUPPORTED}"))
}

/// Splits `SCD-Grad-LS(1.5)` into the base name and the sampling power.
fn split_power(name: &str) -> Result<(&str, Option<f64>)> {
    match name.split_once('(') {
        None => Ok((name, None)),
        Some((base, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| crate::Error::Usage(format!("unbalanced parenthesis in `{name}`")))?;
            let t = inner
                .trim()
                .parse::<f64>()
                .map_err(|_| crate::Error::Usage(format!("bad sampling power in `{name}`")))?;
            Ok((base, Some(t)))
        }
    }
}

/// Maps a method name in the `<family>-<pick>-<update>` convention to a
/// solver.
pub fn parse_method(name: &str, opts: &MethodOptions) -> Result<Method> {
    let name = name.trim();
    if name == "PM" {
        return Ok(Method::PowerMethod);
    }
    let (base, suffix) = split_power(name)?;
    let parts: Vec<&str> = base.split('-').collect();
    let (family, pick, update) = match parts.as_slice() {
        ["Grad", "vecLS"] => ("", "Full", "vecLS"),
        [f, p, u] => (*f, *p, *u),
        _ => return unknown(name),
    };
    let power = suffix.or(opts.t);
    let pick = match (family, pick) {
        ("", "Full") => Pick::Full,
        ("CD", "Cyc") => Pick::Cyclic,
        ("GCD", "Grad") => Pick::GaussSouthwell,
        ("GCD", "LS") => Pick::GreedyLS,
        ("SCD", "Uni") => Pick::GradPower(0.0),
        ("SCD", "Grad") => Pick::GradPower(power.unwrap_or(1.0)),
        _ => return unknown(name),
    };
    if suffix.is_some() && !matches!((family, pick), ("SCD", Pick::GradPower(_))) {
        return usage(format!("only SCD-Grad methods take a sampling power, got `{name}`"));
    }
    let update = match update {
        "Grad" => match opts.gamma {
            Some(g) => Update::FixedGrad(g),
            None => return usage(format!("`{name}` needs a stepsize (--gamma)")),
        },
        "LS" => Update::CoordLS,
        "vecLS" => Update::VecLS,
        _ => return unknown(name),
    };
    let cfg = StrategyConfig::new(pick, update)
        .with_k(opts.k)
        .with_replacement(opts.with_replacement)
        .averaged(opts.averaged)
        .allow_naive_batch(opts.allow_naive_batch);
    let method = Method::Coordinate(cfg);
    method.validate()?;
    Ok(method)
}

/// Whether `name` uses a fixed stepsize and so needs `γ`.
pub fn needs_stepsize(name: &str) -> bool {
    split_power(name.trim()).is_ok_and(|(base, _)| base.ends_with("-Grad") && base.matches('-').count() == 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coord(name: &str, opts: &MethodOptions) -> StrategyConfig {
        match parse_method(name, opts).unwrap() {
            Method::Coordinate(c) => c,
            Method::PowerMethod => panic!("{name} parsed as PM"),
        }
    }

    #[test]
    fn table_names() {
        let d = MethodOptions::default();
        let g = MethodOptions { gamma: Some(0.01), ..d };
        let c = coord("GCD-LS-LS", &d);
        assert_eq!((c.pick, c.update, c.k), (Pick::GreedyLS, Update::CoordLS, 1));
        assert_eq!(coord("GCD-Grad-LS", &d).pick, Pick::GaussSouthwell);
        assert_eq!(coord("CD-Cyc-Grad", &g).update, Update::FixedGrad(0.01));
        assert_eq!(coord("CD-Cyc-LS", &d).pick, Pick::Cyclic);
        assert_eq!(coord("SCD-Grad-LS(1)", &d).pick, Pick::GradPower(1.0));
        let v = coord("SCD-Grad-vecLS(2)", &MethodOptions { k: 4, ..d });
        assert_eq!((v.pick, v.update, v.k), (Pick::GradPower(2.0), Update::VecLS, 4));
        assert_eq!(coord("SCD-Uni-Grad", &g).pick, Pick::GradPower(0.0));
        assert_eq!(coord("Grad-vecLS", &d).pick, Pick::Full);
        assert_eq!(parse_method("PM", &d).unwrap(), Method::PowerMethod);
    }

    #[test]
    fn uniform_is_power_zero() {
        let d = MethodOptions::default();
        assert_eq!(
            parse_method("SCD-Grad-LS(0)", &d).unwrap(),
            parse_method("SCD-Uni-LS", &d).unwrap()
        );
    }

    #[test]
    fn power_from_options() {
        let o = MethodOptions {
            t: Some(2.0),
            ..Default::default()
        };
        assert_eq!(coord("SCD-Grad-LS", &o).pick, Pick::GradPower(2.0));
        assert_eq!(coord("SCD-Grad-LS(1)", &o).pick, Pick::GradPower(1.0));
        assert_eq!(
            coord("SCD-Grad-LS", &MethodOptions::default()).pick,
            Pick::GradPower(1.0)
        );
    }

    #[test]
    fn rejections() {
        let d = MethodOptions::default();
        let err = parse_method("XYZ-Foo", &d).unwrap_err().to_string();
        assert!(err.contains("supported"), "{err}");
        assert!(parse_method("CD-Cyc-Grad", &d).is_err());
        assert!(parse_method("GCD-LS-LS(2)", &d).is_err());
        assert!(parse_method("SCD-Grad-LS(x)", &d).is_err());
        assert!(parse_method("SCD-Grad-LS(1", &d).is_err());
        assert!(parse_method("GCD-LS-LS", &MethodOptions { k: 4, ..d }).is_err());
        assert!(parse_method(
            "GCD-LS-LS",
            &MethodOptions {
                k: 4,
                allow_naive_batch: true,
                ..d
            }
        )
        .is_ok());
        assert!(parse_method(
            "GCD-LS-LS",
            &MethodOptions {
                k: 4,
                averaged: true,
                ..d
            }
        )
        .is_ok());
        assert!(parse_method("CD-Cyc-vecLS", &d).is_err());
    }

    #[test]
    fn names_round_trip() {
        let d = MethodOptions {
            gamma: Some(0.5),
            ..Default::default()
        };
        for name in [
            "GCD-LS-LS",
            "GCD-Grad-LS",
            "CD-Cyc-Grad",
            "SCD-Grad-LS(1)",
            "SCD-Grad-vecLS(2)",
            "Grad-vecLS",
            "PM",
        ] {
            assert_eq!(parse_method(name, &d).unwrap().to_string(), name);
        }
    }

    #[test]
    fn stepsize_detection() {
        assert!(needs_stepsize("CD-Cyc-Grad"));
        assert!(needs_stepsize("SCD-Uni-Grad"));
        assert!(!needs_stepsize("SCD-Grad-LS(1)"));
        assert!(!needs_stepsize("Grad-vecLS"));
        assert!(!needs_stepsize("PM"));
    }
}
