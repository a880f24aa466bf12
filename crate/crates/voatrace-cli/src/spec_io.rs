//! File formats: lattice descriptions and harmonic-polynomial descriptions.
//!
//! Lattice files are JSON objects
//! `{"name": ..., "gram": [[int, ...], ...], "embedding": [["p/q", ...], ...],
//! "cosets": [["p/q", ...], ...]}` with `embedding` and `cosets` optional.
//! Harmonic descriptions are either `{"poly": "<expression in x1..xd>"}` or
//! `{"isotropic": {"t": ["<gaussian rational>", ...], "k": int}}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use voatrace_core::lattice::{isotropic_power, HarmonicPoly, Poly};
use voatrace_core::scalar::{parse_rational, render_rational, GaussianRational};
use voatrace_core::{Error as CoreError, Lattice, Rational};

/// Wire form of a lattice description.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct LatticeSpec {
    pub name: String,
    pub gram: Vec<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cosets: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("unknown lattice {0:?}: not a file, preset, or inline JSON")]
    UnknownLattice(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("bad harmonic description: {0}")]
    Harmonic(String),
}

/// Parse a lattice from JSON text.
pub fn parse_lattice_spec(text: &str) -> Result<Lattice, SpecError> {
    let spec: LatticeSpec =
        serde_json::from_str(text).map_err(|e| SpecError::Json(e.to_string()))?;
    lattice_from_spec(&spec)
}

pub fn lattice_from_spec(spec: &LatticeSpec) -> Result<Lattice, SpecError> {
    let embedding = match &spec.embedding {
        None => None,
        Some(rows) => Some(parse_rational_matrix(rows)?),
    };
    let cosets = match &spec.cosets {
        None => Vec::new(),
        Some(rows) => parse_rational_matrix(rows)?,
    };
    Ok(Lattice::new(
        spec.name.clone(),
        spec.gram.clone(),
        embedding,
        cosets,
    )?)
}

fn parse_rational_matrix(rows: &[Vec<String>]) -> Result<Vec<Vec<Rational>>, SpecError> {
    rows.iter()
        .map(|row| {
            row.iter()
                .map(|s| parse_rational(s).map_err(SpecError::Core))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect()
}

/// Render a lattice back to its wire form (always includes the cosets list,
/// zero coset first, and the embedding when present).
pub fn lattice_to_spec(lattice: &Lattice) -> LatticeSpec {
    LatticeSpec {
        name: lattice.name().to_string(),
        gram: lattice.gram().to_vec(),
        embedding: lattice.embedding().map(|e| {
            e.matrix()
                .iter()
                .map(|row| row.iter().map(render_rational).collect())
                .collect()
        }),
        cosets: Some(
            lattice
                .cosets()
                .iter()
                .map(|c| c.shift().iter().map(render_rational).collect())
                .collect(),
        ),
    }
}

/// Resolve a `--lattice` argument: inline JSON, a file path, a file inside
/// `$VOATRACE_PRESETS`, or a built-in preset name (`a1`, `e8`).
pub fn load_lattice_arg(arg: &str) -> Result<Lattice, SpecError> {
    let trimmed = arg.trim();
    if trimmed.starts_with('{') {
        return parse_lattice_spec(trimmed);
    }
    let path = std::path::Path::new(trimmed);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| SpecError::Io {
            path: trimmed.to_string(),
            msg: e.to_string(),
        })?;
        return parse_lattice_spec(&text);
    }
    if let Ok(dir) = std::env::var("VOATRACE_PRESETS") {
        for candidate in [format!("{dir}/{trimmed}"), format!("{dir}/{trimmed}.json")] {
            let p = std::path::Path::new(&candidate);
            if p.exists() {
                let text = std::fs::read_to_string(p).map_err(|e| SpecError::Io {
                    path: candidate.clone(),
                    msg: e.to_string(),
                })?;
                return parse_lattice_spec(&text);
            }
        }
    }
    match trimmed.to_ascii_lowercase().as_str() {
        "a1" => parse_lattice_spec(builtin_preset("a1").expect("builtin a1")),
        "e8" => parse_lattice_spec(builtin_preset("e8").expect("builtin e8")),
        _ => Err(SpecError::UnknownLattice(trimmed.to_string())),
    }
}

/// Built-in preset sources, identical to the files shipped under `presets/`.
pub fn builtin_preset(name: &str) -> Option<&'static str> {
    match name {
        "a1" => Some(include_str!("../../../presets/a1.json")),
        "e8" => Some(include_str!("../../../presets/e8.json")),
        _ => None,
    }
}

/// Wire form of a harmonic-polynomial description.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum HarmonicSpec {
    Poly { poly: String },
    Isotropic { isotropic: IsotropicSpec },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct IsotropicSpec {
    pub t: Vec<String>,
    pub k: u32,
}

/// Resolve a `--harmonic` argument: inline JSON or a file path.
pub fn load_harmonic_arg(arg: &str, rank: usize) -> Result<HarmonicPoly, SpecError> {
    let trimmed = arg.trim();
    let text = if trimmed.starts_with('{') {
        trimmed.to_string()
    } else {
        std::fs::read_to_string(trimmed).map_err(|e| SpecError::Io {
            path: trimmed.to_string(),
            msg: e.to_string(),
        })?
    };
    let spec: HarmonicSpec =
        serde_json::from_str(&text).map_err(|e| SpecError::Json(e.to_string()))?;
    harmonic_from_spec(&spec, rank)
}

pub fn harmonic_from_spec(spec: &HarmonicSpec, rank: usize) -> Result<HarmonicPoly, SpecError> {
    match spec {
        HarmonicSpec::Poly { poly } => {
            let p = parse_poly(poly, rank)?;
            Ok(HarmonicPoly::new(p)?)
        }
        HarmonicSpec::Isotropic { isotropic } => {
            let mut t: Vec<GaussianRational> = isotropic
                .t
                .iter()
                .map(|s| GaussianRational::parse(s).map_err(SpecError::Core))
                .collect::<Result<Vec<_>, _>>()?;
            if t.len() > rank {
                return Err(SpecError::Harmonic(format!(
                    "direction vector has {} entries, rank is {rank}",
                    t.len()
                )));
            }
            t.resize(rank, GaussianRational::zero());
            Ok(isotropic_power(&t, isotropic.k)?)
        }
    }
}

/// Parse a polynomial expression in `x1..xd`: sums/differences of terms,
/// each a `*`-separated product of an optional (possibly parenthesized)
/// Gaussian-rational coefficient and powers `xi^k`.
pub fn parse_poly(text: &str, rank: usize) -> Result<Poly, SpecError> {
    let mut parser = PolyParser {
        bytes: text.as_bytes(),
        pos: 0,
        rank,
    };
    let p = parser.expression()?;
    parser.skip_ws();
    if parser.pos != parser.bytes.len() {
        return Err(SpecError::Harmonic(format!(
            "unexpected input at byte {} of {text:?}",
            parser.pos
        )));
    }
    Ok(p)
}

struct PolyParser<'a> {
    bytes: &'a [u8],
    pos: usize,
    rank: usize,
}

impl PolyParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn expression(&mut self) -> Result<Poly, SpecError> {
        self.skip_ws();
        let mut negative = false;
        if self.peek() == Some(b'-') {
            negative = true;
            self.pos += 1;
        } else if self.peek() == Some(b'+') {
            self.pos += 1;
        }
        let mut acc = self.term()?;
        if negative {
            acc = acc.scaled(&-GaussianRational::one());
        }
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.add(&t);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.sub(&t);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly, SpecError> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            if self.peek() == Some(b'*') {
                self.pos += 1;
                let f = self.factor()?;
                acc = acc.mul(&f);
            } else if matches!(self.peek(), Some(b'x')) {
                // juxtaposition like "2 x1" or "2i x1 x2"
                let f = self.factor()?;
                acc = acc.mul(&f);
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly, SpecError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                // parenthesized Gaussian-rational literal, e.g. (1+2i)
                let close = self.bytes[self.pos..]
                    .iter()
                    .position(|b| *b == b')')
                    .ok_or_else(|| SpecError::Harmonic("unclosed parenthesis".into()))?;
                let inner =
                    std::str::from_utf8(&self.bytes[self.pos + 1..self.pos + close]).unwrap();
                let c = GaussianRational::parse(inner).map_err(SpecError::Core)?;
                self.pos += close + 1;
                Ok(Poly::constant(c, self.rank))
            }
            Some(b'x') => {
                self.pos += 1;
                let idx = self.integer()? as usize;
                if idx == 0 || idx > self.rank {
                    return Err(SpecError::Harmonic(format!(
                        "variable x{idx} exceeds the rank {}",
                        self.rank
                    )));
                }
                let mut p = Poly::variable(idx - 1, self.rank);
                self.skip_ws();
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    let e = self.integer()?;
                    p = p.pow(e as u32);
                }
                Ok(p)
            }
            Some(c) if c.is_ascii_digit() || c == b'i' => {
                // bare rational or imaginary literal: digits, '/', trailing 'i'
                let start = self.pos;
                while self
                    .peek()
                    .map(|b| b.is_ascii_digit() || b == b'/' || b == b'i')
                    .unwrap_or(false)
                {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                let c = GaussianRational::parse(text).map_err(SpecError::Core)?;
                Ok(Poly::constant(c, self.rank))
            }
            other => Err(SpecError::Harmonic(format!(
                "expected a coefficient or variable, found {:?}",
                other.map(|b| b as char)
            ))),
        }
    }

    fn integer(&mut self) -> Result<u64, SpecError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(SpecError::Harmonic(format!(
                "expected an integer at byte {start}"
            )));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| SpecError::Harmonic("integer out of range".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use voatrace_core::Error as CoreError;

    #[test]
    fn presets_parse_and_match_builtins() {
        let a1 = parse_lattice_spec(builtin_preset("a1").unwrap()).unwrap();
        assert_eq!(a1.rank(), 1);
        assert_eq!(a1.cosets().len(), 2);
        let reference = Lattice::a1();
        assert_eq!(a1.gram(), reference.gram());
        assert_eq!(
            a1.embedding().unwrap().sigma(),
            reference.embedding().unwrap().sigma()
        );

        let e8 = parse_lattice_spec(builtin_preset("e8").unwrap()).unwrap();
        assert_eq!(e8.rank(), 8);
        assert_eq!(e8.determinant().to_string(), "1");
        assert_eq!(e8.level().to_string(), "1");
    }

    #[test]
    fn lattice_spec_round_trip() {
        for name in ["a1", "e8"] {
            let lattice = parse_lattice_spec(builtin_preset(name).unwrap()).unwrap();
            let wire = lattice_to_spec(&lattice);
            let json = serde_json::to_string(&wire).unwrap();
            let again = parse_lattice_spec(&json).unwrap();
            assert_eq!(lattice.gram(), again.gram());
            assert_eq!(lattice.cosets(), again.cosets());
            assert_eq!(
                lattice.embedding().map(|e| e.matrix()),
                again.embedding().map(|e| e.matrix())
            );
            // rendering is deterministic
            assert_eq!(
                json,
                serde_json::to_string(&lattice_to_spec(&again)).unwrap()
            );
        }
    }

    #[test]
    fn bad_specs_report_error_classes() {
        let asym = r#"{"name":"x","gram":[[2,1],[0,2]]}"#;
        assert!(matches!(
            parse_lattice_spec(asym),
            Err(SpecError::Core(CoreError::BadGram(_)))
        ));
        let odd = r#"{"name":"x","gram":[[1]]}"#;
        assert!(matches!(
            parse_lattice_spec(odd),
            Err(SpecError::Core(CoreError::BadGram(_)))
        ));
        let bad_embed = r#"{"name":"x","gram":[[2,0],[0,2]],"embedding":[["1","0"],["1","1"]]}"#;
        assert!(matches!(
            parse_lattice_spec(bad_embed),
            Err(SpecError::Core(CoreError::BadEmbedding(_)))
        ));
        let not_json = "{gram: oops";
        assert!(matches!(
            parse_lattice_spec(not_json),
            Err(SpecError::Json(_))
        ));
    }

    #[test]
    fn harmonic_specs() {
        let p = harmonic_from_spec(
            &serde_json::from_str(r#"{"poly": "x1^2 - x2^2"}"#).unwrap(),
            8,
        )
        .unwrap();
        assert_eq!(p.degree(), 2);
        let iso = harmonic_from_spec(
            &serde_json::from_str(r#"{"isotropic": {"t": ["1", "i"], "k": 4}}"#).unwrap(),
            8,
        )
        .unwrap();
        assert_eq!(iso.degree(), 4);
        // a non-harmonic polynomial is rejected
        let bad = harmonic_from_spec(&serde_json::from_str(r#"{"poly": "x1^2"}"#).unwrap(), 2);
        assert!(matches!(bad, Err(SpecError::Core(CoreError::NotHarmonic))));
        // a non-isotropic direction is rejected
        let bad = harmonic_from_spec(
            &serde_json::from_str(r#"{"isotropic": {"t": ["1", "1"], "k": 2}}"#).unwrap(),
            2,
        );
        assert!(matches!(bad, Err(SpecError::Core(CoreError::NotIsotropic))));
    }

    #[test]
    fn poly_expressions() {
        let p = parse_poly("2i*x1*x2 + x1^2 - x2^2", 2).unwrap();
        assert_eq!(p.degree(), Some(2));
        let q = parse_poly("(1+i) x1 x2^3", 4).unwrap();
        assert_eq!(q.degree(), Some(4));
        let r = parse_poly("1/2", 1).unwrap();
        assert_eq!(r.degree(), Some(0));
        assert!(parse_poly("x9", 2).is_err());
        assert!(parse_poly("x1 +", 2).is_err());
    }
}
