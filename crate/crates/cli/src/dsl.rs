//! Line-oriented variety definitions.
//!
//! ```text
//! variety "twisted_cubic"
//! params t [fiber: s]
//! ambient 4
//! coord 1
//! coord t
//! coord t^2
//! coord t^3
//! form standard | fit | explicit [["0","1"],["-1","0"]]
//! ```
//!
//! A hypersurface replaces `params`/`ambient`/`coord` with `vars x, y, z`,
//! one `equation <poly>` and any number of `singular <c0>, <c1>, ...` lines
//! listing known singular points. A `lift conormal` line turns the
//! definition into the conormal lift of the described source, which may be
//! named with `source "<name>"`. Blank lines and `#` comments are ignored.

use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use leglab::conormal::{build_conormal_lift, LiftSource};
use leglab::poly::parse_poly;
use leglab::scalar::rational_string;
use leglab::variety::{ImplicitHypersurface, ParamVariety, Variety};
use leglab::{MultiPoly, Rational, SymplecticForm};

/// The `form` directive.
#[derive(Clone, Debug, PartialEq)]
pub enum FormSpec {
    Standard,
    Fit,
    Explicit(SymplecticForm),
}

/// A parsed definition.
#[derive(Clone, Debug)]
pub struct Definition {
    pub name: String,
    pub variety: Variety,
    /// The source of a `lift conormal` definition.
    pub source: Option<Variety>,
    pub form: Option<FormSpec>,
}

#[derive(Default)]
struct Fields {
    name: Option<String>,
    params: Option<(Vec<String>, Vec<String>)>,
    ambient: Option<usize>,
    coords: Vec<(usize, String)>,
    vars: Option<Vec<String>>,
    equation: Option<(usize, String)>,
    singular: Vec<(usize, String)>,
    lift: bool,
    source: Option<String>,
    form: Option<FormSpec>,
}

fn quoted(rest: &str, line: usize) -> Result<String> {
    rest.strip_prefix('"')
        .and_then(|r| r.strip_suffix('"'))
        .filter(|r| !r.is_empty() && !r.contains('"'))
        .map(str::to_string)
        .ok_or_else(|| anyhow!("line {line}: expected a quoted name"))
}

fn name_list(text: &str) -> Vec<String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_rational(text: &str) -> Result<Rational> {
    let p = parse_poly(text.trim(), &[]).map_err(|e| anyhow!("bad rational `{text}`: {e}"))?;
    Ok(p.coefficient(&[]))
}

fn parse_form_matrix(text: &str) -> Result<SymplecticForm> {
    let rows: Vec<Vec<serde_json::Value>> =
        serde_json::from_str(text).context("explicit form must be a JSON matrix")?;
    let rows = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| match v {
                    serde_json::Value::String(s) => parse_rational(s),
                    serde_json::Value::Number(n) if n.is_i64() => parse_rational(&n.to_string()),
                    _ => bail!("form entries must be integers or \"p/q\" strings"),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SymplecticForm::from_rows(rows)?)
}

/// Parse a definition file.
pub fn parse_definition(text: &str) -> Result<Definition> {
    let mut f = Fields::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let rest = rest.trim();
        match key {
            "variety" => f.name = Some(quoted(rest, line)?),
            "source" => f.source = Some(quoted(rest, line)?),
            "params" => {
                let (names, fiber) = match rest.split_once('[') {
                    Some((names, tail)) => {
                        let inner = tail
                            .trim()
                            .strip_suffix(']')
                            .and_then(|t| t.trim().strip_prefix("fiber:"))
                            .ok_or_else(|| anyhow!("line {line}: expected `[fiber: ...]`"))?;
                        (name_list(names), name_list(inner))
                    }
                    None => (name_list(rest), Vec::new()),
                };
                f.params = Some((names, fiber));
            }
            "ambient" => {
                f.ambient = Some(
                    rest.parse()
                        .with_context(|| format!("line {line}: bad ambient dimension"))?,
                )
            }
            "coord" => f.coords.push((line, rest.to_string())),
            "vars" => f.vars = Some(name_list(rest)),
            "equation" => f.equation = Some((line, rest.to_string())),
            "singular" => f.singular.push((line, rest.to_string())),
            "lift" if rest == "conormal" => f.lift = true,
            "form" => {
                let (kind, arg) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                f.form = Some(match kind {
                    "standard" => FormSpec::Standard,
                    "fit" => FormSpec::Fit,
                    "explicit" => {
                        FormSpec::Explicit(parse_form_matrix(arg.trim()).with_context(|| format!("line {line}"))?)
                    }
                    _ => bail!("line {line}: form must be standard, fit or explicit"),
                });
            }
            _ => bail!("line {line}: unknown directive `{key}`"),
        }
    }
    build(f)
}

fn build(f: Fields) -> Result<Definition> {
    let name = f.name.ok_or_else(|| anyhow!("missing `variety \"<name>\"` line"))?;
    let source_name = f.source.clone().unwrap_or_else(|| name.clone());
    let base = match (f.params, f.vars) {
        (Some((params, fiber)), None) => {
            let ambient = f.ambient.ok_or_else(|| anyhow!("missing `ambient` line"))?;
            if f.coords.len() != ambient {
                bail!("ambient {ambient} declared but {} coord lines given", f.coords.len());
            }
            if f.equation.is_some() || !f.singular.is_empty() {
                bail!("`equation`/`singular` need `vars`, not `params`");
            }
            let coords = f
                .coords
                .iter()
                .map(|(line, c)| parse_poly(c, &params).map_err(|e| anyhow!("line {line}: {e}")))
                .collect::<Result<Vec<MultiPoly>>>()?;
            let fiber: Vec<&str> = fiber.iter().map(String::as_str).collect();
            Variety::Param(Arc::new(ParamVariety::new(&source_name, params, &fiber, coords)?))
        }
        (None, Some(vars)) => {
            if f.ambient.is_some() || !f.coords.is_empty() {
                bail!("`ambient`/`coord` need `params`, not `vars`");
            }
            let (line, eq) = f.equation.ok_or_else(|| anyhow!("missing `equation` line"))?;
            let eq = parse_poly(&eq, &vars).map_err(|e| anyhow!("line {line}: {e}"))?;
            let singular = f
                .singular
                .iter()
                .map(|(line, s)| {
                    let p = s.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
                    if p.len() != vars.len() {
                        bail!("line {line}: singular point needs {} coordinates", vars.len());
                    }
                    Ok(p)
                })
                .collect::<Result<Vec<_>>>()?;
            Variety::Hypersurface(Arc::new(ImplicitHypersurface::new(&source_name, eq, singular)?))
        }
        (Some(_), Some(_)) => bail!("`params` and `vars` are mutually exclusive"),
        (None, None) => bail!("missing `params` or `vars` line"),
    };
    if f.lift {
        let lift = build_conormal_lift(&base)?.with_name(&name);
        return Ok(Definition {
            name,
            variety: Variety::Conormal(Arc::new(lift)),
            source: Some(base),
            form: f.form,
        });
    }
    if f.source.is_some() {
        bail!("`source` is only meaningful with `lift conormal`");
    }
    Ok(Definition {
        name,
        variety: base,
        source: None,
        form: f.form,
    })
}

fn matrix_json(form: &SymplecticForm) -> String {
    let rows: Vec<Vec<String>> = form
        .rows()
        .iter()
        .map(|r| r.iter().map(rational_string).collect())
        .collect();
    serde_json::to_string(&rows).expect("strings serialize")
}

fn write_source(out: &mut String, v: &Variety) -> Result<()> {
    match v {
        Variety::Param(p) => {
            out.push_str(&format!("params {}", p.params().join(", ")));
            let fiber = p.fiber_params();
            if !fiber.is_empty() {
                out.push_str(&format!(" [fiber: {}]", fiber.join(", ")));
            }
            out.push_str(&format!("\nambient {}\n", p.ambient_dim()));
            for c in p.coords() {
                out.push_str(&format!("coord {c}\n"));
            }
        }
        Variety::Hypersurface(h) => {
            out.push_str(&format!("vars {}\n", h.vars().join(", ")));
            out.push_str(&format!("equation {}\n", h.equation()));
            for s in h.singular_points() {
                let s: Vec<String> = s.iter().map(rational_string).collect();
                out.push_str(&format!("singular {}\n", s.join(", ")));
            }
        }
        _ => bail!("only parametrized varieties and hypersurfaces can be sources"),
    }
    Ok(())
}

/// Render `v` in the definition format.
pub fn export_definition(v: &Variety, form: Option<&FormSpec>) -> Result<String> {
    let mut out = format!("variety \"{}\"\n", v.name());
    match v {
        Variety::Conormal(l) => {
            let src = match l.source() {
                LiftSource::Param(p) => Variety::Param(p.clone()),
                LiftSource::Hypersurface(h) => Variety::Hypersurface(h.clone()),
            };
            out.push_str(&format!("source \"{}\"\n", src.name()));
            write_source(&mut out, &src)?;
            out.push_str("lift conormal\n");
        }
        Variety::Reduced(_) => bail!("reduced varieties have no definition format"),
        _ => write_source(&mut out, v)?,
    }
    match form {
        Some(FormSpec::Standard) => out.push_str("form standard\n"),
        Some(FormSpec::Fit) => out.push_str("form fit\n"),
        Some(FormSpec::Explicit(f)) => out.push_str(&format!("form explicit {}\n", matrix_json(f))),
        None => {}
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUBIC: &str = "variety \"cubic\"\nparams t\nambient 4\ncoord 1\ncoord t\ncoord t^2\ncoord t^3\nform fit\n";

    #[test]
    fn parses_parametrization() {
        let d = parse_definition(CUBIC).unwrap();
        assert_eq!(d.name, "cubic");
        assert_eq!(d.variety.ambient_dim(), 4);
        assert_eq!(d.form, Some(FormSpec::Fit));
        assert_eq!(export_definition(&d.variety, d.form.as_ref()).unwrap(), CUBIC);
    }

    #[test]
    fn parses_hypersurface_lift() {
        let text = "variety \"nodal\"\nsource \"z\"\nvars x, y, z\nequation z*y^2 - x^3 - x^2*z\nsingular 0, 0, 1\nlift conormal\n";
        let d = parse_definition(text).unwrap();
        assert_eq!(d.variety.ambient_dim(), 6);
        assert_eq!(d.source.as_ref().unwrap().name(), "z");
    }

    #[test]
    fn explicit_form() {
        let text =
            "variety \"line\"\nparams t\nambient 2\ncoord 1\ncoord t\nform explicit [[0, \"1/2\"], [\"-1/2\", 0]]\n";
        let d = parse_definition(text).unwrap();
        let Some(FormSpec::Explicit(f)) = d.form else { panic!() };
        assert_eq!(f.entry(0, 1).to_string(), "1/2");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_definition("params t\n").is_err());
        assert!(parse_definition("variety \"x\"\nparams t\nambient 2\ncoord 1\n").is_err());
        assert!(parse_definition("variety \"x\"\nfrobnicate\n").is_err());
        assert!(parse_definition("variety \"x\"\nparams t\nambient 1\ncoord t^\n").is_err());
    }
}
