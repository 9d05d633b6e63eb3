//! JSON input documents and their conversion to library objects.

use anyhow::{anyhow, bail, Context};
use conekit::bundle::{Fan, LatticeChain, Mat2, MultiCharacter, Scalar, Uniformizer, WeightedFlag};
use conekit::complex::{zero_monoid, Complex, FaceMap, PoGroup};
use conekit::lattice::{IVec, Int, IntegerMatrix};
use conekit::linalg::{RVec, Rat};
use conekit::monoid::FineMonoid;
use conekit::morphism::MonoidMap;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// An exact integer, read from a JSON number or a decimal string and
/// written as a string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Z(pub Int);

impl Serialize for Z {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

struct ZVisitor;

impl de::Visitor<'_> for ZVisitor {
    type Value = Z;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a decimal integer string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Z, E> {
        Ok(Z(Int::from(v)))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Z, E> {
        Ok(Z(Int::from(v)))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Z, E> {
        Int::from_str(v.trim()).map(Z).map_err(|_| E::custom(format!("not an integer: {v:?}")))
    }
}

impl<'de> Deserialize<'de> for Z {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Z, D::Error> {
        d.deserialize_any(ZVisitor)
    }
}

/// An exact rational, `"a/b"` or an integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Q(pub Rat);

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

struct QVisitor;

impl de::Visitor<'_> for QVisitor {
    type Value = Q;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a rational string \"a/b\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Q, E> {
        Ok(Q(Rat::from_integer(Int::from(v))))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Q, E> {
        Ok(Q(Rat::from_integer(Int::from(v))))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Q, E> {
        let t = v.trim();
        let bad = || E::custom(format!("not a rational: {v:?}"));
        match t.split_once('/') {
            None => Int::from_str(t).map(|n| Q(Rat::from_integer(n))).map_err(|_| bad()),
            Some((n, d)) => {
                let n = Int::from_str(n.trim()).map_err(|_| bad())?;
                let d = Int::from_str(d.trim()).map_err(|_| bad())?;
                if d == Int::from(0) {
                    return Err(E::custom("zero denominator"));
                }
                Ok(Q(Rat::new(n, d)))
            }
        }
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        d.deserialize_any(QVisitor)
    }
}

pub type ZVec = Vec<Z>;

pub fn ivec(v: &[Z]) -> IVec {
    v.iter().map(|z| z.0.clone()).collect()
}

pub fn zvec(v: &[Int]) -> ZVec {
    v.iter().cloned().map(Z).collect()
}

fn ivecs(v: &[ZVec]) -> Vec<IVec> {
    v.iter().map(|x| ivec(x)).collect()
}

fn matrix(rows: &[ZVec], nrows: usize, ncols: usize, what: &str) -> anyhow::Result<IntegerMatrix> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(conekit::Error::RankMismatch(format!("{what} must be {nrows}x{ncols}"))).context(what.to_string());
    }
    Ok(IntegerMatrix::from_rows(&ivecs(rows), ncols))
}

fn check_lengths(v: &[ZVec], n: usize, what: &str) -> anyhow::Result<()> {
    if let Some(x) = v.iter().find(|x| x.len() != n) {
        return Err(conekit::Error::RankMismatch(format!("{what}: vector of length {} in rank {n}", x.len()))).context(what.to_string());
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonoidDoc {
    pub ambient_rank: usize,
    pub generators: Vec<ZVec>,
}

impl MonoidDoc {
    pub fn build(&self) -> anyhow::Result<FineMonoid> {
        check_lengths(&self.generators, self.ambient_rank, "generators")?;
        Ok(FineMonoid::new(self.ambient_rank, ivecs(&self.generators))?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    pub source: MonoidDoc,
    pub target: MonoidDoc,
    /// Rows indexed by target coordinates, columns by source coordinates.
    pub matrix: Vec<ZVec>,
    /// Named elements of the target group, usable as `--q name`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub elements: BTreeMap<String, ZVec>,
}

impl MorphismDoc {
    pub fn build(&self) -> anyhow::Result<MonoidMap> {
        let p = self.source.build().context("source")?;
        let q = self.target.build().context("target")?;
        let m = matrix(&self.matrix, q.ambient_rank(), p.ambient_rank(), "matrix")?;
        Ok(MonoidMap::new(p, q, m)?)
    }
}

/// A weakly convex cone: a group `Z^rank` with either its positives or
/// their dual (the realization), over an optional base monoid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeDoc {
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positives: Option<Vec<ZVec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realization: Option<Vec<ZVec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<MonoidDoc>,
    /// `rank` rows, one column per base coordinate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_map: Option<Vec<ZVec>>,
}

impl ConeDoc {
    pub fn build(&self) -> anyhow::Result<PoGroup> {
        let base = match &self.base {
            Some(b) => b.build().context("base")?,
            None => zero_monoid(),
        };
        let bm = match &self.base_map {
            Some(rows) => matrix(rows, self.rank, base.ambient_rank(), "base_map")?,
            None => IntegerMatrix::zeros(self.rank, base.ambient_rank()),
        };
        match (&self.positives, &self.realization) {
            (Some(p), None) => {
                check_lengths(p, self.rank, "positives")?;
                Ok(PoGroup::new(self.rank, &ivecs(p), base, bm)?)
            }
            (None, Some(r)) => {
                check_lengths(r, self.rank, "realization")?;
                Ok(PoGroup::from_realization(self.rank, &ivecs(r), base, bm)?)
            }
            _ => bail!("give exactly one of positives and realization"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceMapDoc {
    pub from: usize,
    pub to: usize,
    pub matrix: Vec<ZVec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalDoc {
    pub rank: usize,
    pub maps: Vec<Vec<ZVec>>,
}

/// Either `pieces` sharing one group (all faces are generated), or
/// explicit `cells` with face maps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDoc {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pieces: Vec<ConeDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<ConeDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub face_maps: Vec<FaceMapDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global: Option<GlobalDoc>,
}

impl ComplexDoc {
    pub fn build(&self) -> anyhow::Result<Complex> {
        if !self.pieces.is_empty() {
            if !self.cells.is_empty() || !self.face_maps.is_empty() {
                bail!("give either pieces or cells, not both");
            }
            let ps = self.pieces.iter().enumerate().map(|(i, p)| p.build().with_context(|| format!("pieces[{i}]"))).collect::<anyhow::Result<Vec<_>>>()?;
            return Ok(Complex::from_pieces(&ps)?);
        }
        let cells = self.cells.iter().enumerate().map(|(i, c)| c.build().with_context(|| format!("cells[{i}]"))).collect::<anyhow::Result<Vec<_>>>()?;
        let mut maps = Vec::new();
        for (k, f) in self.face_maps.iter().enumerate() {
            let (a, b) = (cells.get(f.from), cells.get(f.to));
            let (Some(a), Some(b)) = (a, b) else { bail!("face_maps[{k}]: cell index out of range") };
            maps.push(FaceMap { from: f.from, to: f.to, matrix: matrix(&f.matrix, b.rank(), a.rank(), "face map")? });
        }
        let ranks: Vec<usize> = cells.iter().map(|c| c.rank()).collect();
        let mut cx = Complex::new(cells, maps)?;
        if let Some(g) = &self.global {
            if g.maps.len() != ranks.len() {
                bail!("global: one map per cell");
            }
            let ms = g.maps.iter().zip(&ranks).map(|(m, &r)| matrix(m, r, g.rank, "global map")).collect::<anyhow::Result<Vec<_>>>()?;
            cx = cx.with_global(g.rank, ms)?;
        }
        Ok(cx)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubdivisionDoc {
    pub sigma: ConeDoc,
    pub pieces: Vec<ConeDoc>,
    /// Points (lattice points of the realization of sigma) at which the
    /// `star` command localizes.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<ZVec>,
}

impl SubdivisionDoc {
    pub fn build(&self) -> anyhow::Result<(PoGroup, Vec<PoGroup>)> {
        let s = self.sigma.build().context("sigma")?;
        let ps = self.pieces.iter().enumerate().map(|(i, p)| p.build().with_context(|| format!("pieces[{i}]"))).collect::<anyhow::Result<Vec<_>>>()?;
        Ok((s, ps))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MulticharDoc {
    pub rank: usize,
    pub characters: Vec<ZVec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeDoc>,
}

impl MulticharDoc {
    pub fn build(&self) -> anyhow::Result<MultiCharacter> {
        check_lengths(&self.characters, self.rank, "characters")?;
        Ok(MultiCharacter::new(self.rank, ivecs(&self.characters))?)
    }

    pub fn cone(&self) -> anyhow::Result<PoGroup> {
        let c = self.cone.as_ref().ok_or_else(|| anyhow!("this command needs a cone"))?.build().context("cone")?;
        if c.rank() != self.rank {
            return Err(conekit::Error::RankMismatch("cone and characters have different ranks".into()).into());
        }
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanDoc {
    pub dim: usize,
    pub rays: Vec<ZVec>,
    pub cones: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagDoc {
    pub weights: Vec<Z>,
    /// Each subspace as a list of spanning vectors.
    pub spaces: Vec<Vec<Vec<Q>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagsDoc {
    pub fan: FanDoc,
    pub flags: Vec<FlagDoc>,
    /// One multicharacter per cone of the fan.
    pub psi: Vec<Vec<ZVec>>,
}

impl FlagsDoc {
    pub fn build(&self) -> anyhow::Result<(Fan, Vec<WeightedFlag>, Vec<MultiCharacter>)> {
        let d = self.fan.dim;
        check_lengths(&self.fan.rays, d, "rays")?;
        if self.fan.cones.iter().flatten().any(|&i| i >= self.fan.rays.len()) {
            bail!("fan: ray index out of range");
        }
        let fan = Fan { dim: d, rays: ivecs(&self.fan.rays), cones: self.fan.cones.clone() };
        let r = self.psi.first().map(|u| u.len()).unwrap_or(0);
        let mut flags = Vec::new();
        for (i, f) in self.flags.iter().enumerate() {
            let spaces: Vec<Vec<RVec>> =
                f.spaces.iter().map(|s| s.iter().map(|v| v.iter().map(|q| q.0.clone()).collect()).collect()).collect();
            if spaces.iter().flatten().any(|v: &RVec| v.len() != r) {
                return Err(conekit::Error::RankMismatch(format!("flags[{i}]: vectors must have length {r}")).into());
            }
            flags.push(WeightedFlag::new(r, f.weights.iter().map(|w| w.0.clone()).collect(), spaces).with_context(|| format!("flags[{i}]"))?);
        }
        let mut psi = Vec::new();
        for (i, u) in self.psi.iter().enumerate() {
            check_lengths(u, d, "psi")?;
            psi.push(MultiCharacter::new(d, ivecs(u)).with_context(|| format!("psi[{i}]"))?);
        }
        Ok((fan, flags, psi))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniformizerDoc {
    Formal,
    Prime(Z),
}

/// A matrix entry: a rational constant, or `[[k, c], ...]` meaning
/// `sum c π^k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryDoc {
    Constant(Q),
    Laurent(Vec<(i64, Q)>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeChainDoc {
    pub uniformizer: UniformizerDoc,
    /// 2x2 matrices whose columns are lattice bases.
    pub lattices: Vec<[[EntryDoc; 2]; 2]>,
}

impl LatticeChainDoc {
    pub fn build(&self) -> anyhow::Result<LatticeChain> {
        let u = match &self.uniformizer {
            UniformizerDoc::Formal => Uniformizer::Formal,
            UniformizerDoc::Prime(p) => {
                if p.0 < Int::from(2) {
                    bail!("uniformizer must be a prime");
                }
                Uniformizer::Prime(p.0.clone())
            }
        };
        let entry = |e: &EntryDoc| match e {
            EntryDoc::Constant(q) => Scalar::rational(q.0.clone()),
            EntryDoc::Laurent(terms) => {
                terms.iter().fold(Scalar::zero(), |acc, (k, c)| acc.add(&u.pi_pow(*k).mul(&Scalar::rational(c.0.clone()))))
            }
        };
        let lattices: Vec<Mat2> = self
            .lattices
            .iter()
            .map(|m| [[entry(&m[0][0]), entry(&m[0][1])], [entry(&m[1][0]), entry(&m[1][1])]])
            .collect();
        Ok(LatticeChain { uniformizer: u, lattices })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Monoid(MonoidDoc),
    Morphism(MorphismDoc),
    Complex(ComplexDoc),
    Subdivision(SubdivisionDoc),
    Multichar(MulticharDoc),
    Flags(FlagsDoc),
    LatticeChain(LatticeChainDoc),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Monoid(_) => "monoid",
            Payload::Morphism(_) => "morphism",
            Payload::Complex(_) => "complex",
            Payload::Subdivision(_) => "subdivision",
            Payload::Multichar(_) => "multichar",
            Payload::Flags(_) => "flags",
            Payload::LatticeChain(_) => "lattice_chain",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Document {
    #[serde(flatten)]
    pub payload: Payload,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Expected results for the corpus runner, keyed by result name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expected: BTreeMap<String, serde_json::Value>,
}

/// A parse failure with position and field path.
#[derive(Debug)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub path: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {} column {}", self.line, self.column)?;
        if !self.path.is_empty() && self.path != "." {
            write!(f, " at {}", self.path)?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ParseError {}

const ENVELOPE: [&str; 4] = ["kind", "name", "note", "expected"];

fn payload_from(kind: &str, body: Value) -> Result<Payload, (String, String)> {
    fn de<T: serde::de::DeserializeOwned>(v: Value) -> Result<T, (String, String)> {
        serde_path_to_error::deserialize(v).map_err(|e| (e.path().to_string(), e.into_inner().to_string()))
    }
    Ok(match kind {
        "monoid" => Payload::Monoid(de(body)?),
        "morphism" => Payload::Morphism(de(body)?),
        "complex" => Payload::Complex(de(body)?),
        "subdivision" => Payload::Subdivision(de(body)?),
        "multichar" => Payload::Multichar(de(body)?),
        "flags" => Payload::Flags(de(body)?),
        "lattice_chain" => Payload::LatticeChain(de(body)?),
        k => {
            return Err((
                "kind".into(),
                format!("unknown kind {k:?}; expected monoid, morphism, complex, subdivision, multichar, flags or lattice_chain"),
            ))
        }
    })
}

/// Splits a JSON object into the envelope fields and the payload.
fn document_from(v: Value) -> Result<Document, (String, String)> {
    let Value::Object(mut m) = v else { return Err((".".into(), "a document must be a JSON object".into())) };
    let kind = match m.get("kind") {
        Some(Value::String(k)) => k.clone(),
        Some(_) => return Err(("kind".into(), "kind must be a string".into())),
        None => return Err((".".into(), "missing field `kind`".into())),
    };
    let text = |m: &Map<String, Value>, k: &str| -> Result<Option<String>, (String, String)> {
        match m.get(k) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err((k.into(), format!("{k} must be a string"))),
        }
    };
    let name = text(&m, "name")?;
    let note = text(&m, "note")?;
    let expected = match m.get("expected") {
        None | Some(Value::Null) => BTreeMap::new(),
        Some(Value::Object(e)) => e.clone().into_iter().collect(),
        Some(_) => return Err(("expected".into(), "expected must be an object".into())),
    };
    for k in ENVELOPE {
        m.remove(k);
    }
    let payload = payload_from(&kind, Value::Object(m))?;
    Ok(Document { payload, name, note, expected })
}

impl<'de> Deserialize<'de> for Document {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Document, D::Error> {
        let v = Value::deserialize(d)?;
        document_from(v).map_err(|(p, m)| de::Error::custom(format!("at {p}: {m}")))
    }
}

/// Byte offset of the value at `path` (serde_path_to_error notation) in
/// `text`, as far as the path can be followed.
fn locate(text: &str, path: &str) -> usize {
    let mut cur: &str = text;
    let base = text.as_ptr() as usize;
    for seg in path.split(['.', '[']).filter(|s| !s.is_empty() && *s != "?") {
        let seg = seg.trim_end_matches(']');
        let next: Option<&RawValue> = match seg.parse::<usize>() {
            Ok(i) => serde_json::from_str::<Vec<&RawValue>>(cur).ok().and_then(|v| v.get(i).copied()),
            Err(_) => serde_json::from_str::<BTreeMap<String, &RawValue>>(cur).ok().and_then(|m| m.get(seg).copied()),
        };
        match next {
            Some(r) => cur = r.get(),
            None => break,
        }
    }
    cur.as_ptr() as usize - base
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map(|i| offset - i).unwrap_or(offset + 1);
    (line, col)
}

pub fn parse(text: &str) -> Result<Document, ParseError> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| ParseError { line: e.line(), column: e.column(), path: String::new(), message: e.to_string() })?;
    document_from(v).map_err(|(path, message)| {
        let (line, column) = line_col(text, locate(text, &path));
        ParseError { line, column, path, message }
    })
}

pub fn to_json(doc: &Document) -> String {
    serde_json::to_string_pretty(doc).expect("documents serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_numbers_and_strings() {
        let d = parse(r#"{"kind":"monoid","ambient_rank":2,"generators":[[1,0],["0","1"]]}"#).unwrap();
        let Payload::Monoid(m) = &d.payload else { panic!() };
        assert_eq!(m.build().unwrap(), FineMonoid::free(2));
        let again = parse(&to_json(&d)).unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn rank_mismatch_is_reported() {
        let t = r#"{"kind":"morphism","source":{"ambient_rank":3,"generators":[[1,0,0],[0,1,0],[0,0,1]]},
            "target":{"ambient_rank":2,"generators":[[1,0],[0,1]]},"matrix":[[1,0,0],[0,1,0],[0,0,1]]}"#;
        let Payload::Morphism(m) = parse(t).unwrap().payload else { panic!() };
        let e = m.build().unwrap_err();
        assert!(e.chain().any(|c| matches!(c.downcast_ref::<conekit::Error>(), Some(conekit::Error::RankMismatch(_)))));
    }

    #[test]
    fn parse_error_has_position() {
        let e = parse("{\"kind\":\"monoid\",\n\"ambient_rank\":\"x\"}").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.path.contains("ambient_rank"), "{e}");
    }

    #[test]
    fn big_integers_survive() {
        let t = r#"{"kind":"multichar","rank":1,"characters":[["123456789012345678901234567890"]]}"#;
        let d = parse(t).unwrap();
        assert!(to_json(&d).contains("123456789012345678901234567890"));
    }
}
