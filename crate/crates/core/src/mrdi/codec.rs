//! Saving values to documents and loading them back.
//!
//! Saving is two-phase: the type tree is built first (registering every
//! context it meets, base rings before the rings over them), then the data
//! subtree is written. Long-term documents additionally carry `_ns` and the
//! accumulated `_refs`.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::document::{serialize_text, DataNode, MrdiDocument, NamespaceRecord, Param, TypeNode};
use super::state::{resolve_ring_param, DeserializerState, GlobalSerializerState, Mode, SerializerState};
use crate::algebra::{ContextHandle, Element, ExactMatrix, MonomialMap, Polynomial, RingDescriptor};
use crate::error::{Error, Result};
use super::value::Value;

pub fn save(value: &Value, state: &mut SerializerState<'_>) -> Result<MrdiDocument> {
    let type_tree = type_node(value, state)?;
    let data = encode_value(value, state.mode());
    let (ns, refs) = match state.mode() {
        Mode::LongTerm => (Some(NamespaceRecord::current()), Some(state.take_pending())),
        Mode::Ipc => (None, None),
    };
    Ok(MrdiDocument {
        ns,
        type_tree,
        refs,
        data,
    })
}

/// Saves `value` under a fresh serializer state bound to `global`.
pub fn save_value(value: &Value, mode: Mode, global: &GlobalSerializerState) -> Result<MrdiDocument> {
    save(value, &mut SerializerState::new(mode, global))
}

/// Saves and renders to text in one step.
pub fn save_bytes(value: &Value, mode: Mode, global: &GlobalSerializerState) -> Result<Vec<u8>> {
    Ok(serialize_text(&save_value(value, mode, global)?))
}

fn ring_tag(ctx: &ContextHandle) -> &'static str {
    match ctx.descriptor() {
        RingDescriptor::Integers => "ZZRing",
        RingDescriptor::Rationals => "QQField",
        RingDescriptor::PrimeField(_) => "FpField",
        RingDescriptor::Univariate { .. } => "PolyRing",
        RingDescriptor::Multivariate { .. } => "MPolyRing",
    }
}

fn type_node(value: &Value, state: &mut SerializerState<'_>) -> Result<TypeNode> {
    Ok(match value {
        Value::Integer(_) => TypeNode::new("ZZRingElem"),
        Value::Rational(_) => TypeNode::new("QQFieldElem"),
        Value::Residue { field, .. } => TypeNode::with_ref("FpFieldElem", state.context_uuid(field)?),
        Value::Polynomial(p) => {
            let tag = if p.parent().is_univariate() { "PolyRingElem" } else { "MPolyRingElem" };
            TypeNode::with_ref(tag, state.context_uuid(p.parent())?)
        }
        Value::Matrix(m) => TypeNode::with_params("Matrix", state.ring_param(m.parent())?),
        Value::Ring(ctx) => match state.ring_param(ctx)? {
            Param::Ref(u) => TypeNode::with_ref(ring_tag(ctx), u),
            _ => TypeNode::new(ring_tag(ctx)),
        },
        Value::MonomialMap(m) => TypeNode::with_params(
            "MonomialMap",
            Param::Map(vec![
                ("domain".into(), Param::Ref(state.context_uuid(m.source())?)),
                ("codomain".into(), Param::Ref(state.context_uuid(m.target())?)),
            ]),
        ),
        Value::Vector(items) => {
            let mut nodes = items.iter().map(|v| type_node(v, state));
            match nodes.next() {
                None => TypeNode::new("Vector"),
                Some(first) => {
                    let first = first?;
                    for n in nodes {
                        if n? != first {
                            return Err(Error::Validation("vector items must share one type".into()));
                        }
                    }
                    TypeNode::with_params("Vector", Param::Type(Box::new(first)))
                }
            }
        }
        Value::Tuple(items) => TypeNode::with_params(
            "Tuple",
            Param::Map(
                items
                    .iter()
                    .enumerate()
                    .map(|(i, v)| Ok((i.to_string(), Param::Type(Box::new(type_node(v, state)?)))))
                    .collect::<Result<Vec<_>>>()?,
            ),
        ),
    })
}

fn encode_value(value: &Value, mode: Mode) -> DataNode {
    match value {
        Value::Integer(n) => DataNode::text(n.to_string()),
        Value::Rational(q) => DataNode::text(q.to_string()),
        Value::Residue { value, .. } => DataNode::text(value.to_string()),
        Value::Polynomial(p) => encode_poly(p, mode),
        Value::Matrix(m) => DataNode::Map(vec![
            ("rows".into(), DataNode::text(m.rows().to_string())),
            ("cols".into(), DataNode::text(m.cols().to_string())),
            (
                "entries".into(),
                DataNode::Seq(m.entries().iter().map(|e| encode_element(e, mode)).collect()),
            ),
        ]),
        Value::Ring(_) => DataNode::Map(vec![]),
        Value::MonomialMap(m) => DataNode::Seq(m.images().iter().map(|p| encode_poly(p, mode)).collect()),
        Value::Vector(items) | Value::Tuple(items) => {
            DataNode::Seq(items.iter().map(|v| encode_value(v, mode)).collect())
        }
    }
}

fn encode_element(e: &Element, mode: Mode) -> DataNode {
    match e {
        Element::Integer(n) => DataNode::text(n.to_string()),
        Element::Rational(q) => DataNode::text(q.to_string()),
        Element::Residue(r) => DataNode::text(r.to_string()),
        Element::Poly(p) => encode_poly(p, mode),
    }
}

fn encode_poly(p: &Polynomial, mode: Mode) -> DataNode {
    if p.parent().is_univariate() {
        return encode_univariate(p, mode);
    }
    DataNode::Seq(
        p.terms()
            .iter()
            .map(|(m, c)| {
                let exps = m.exponents().iter().map(|e| DataNode::text(e.to_string())).collect();
                DataNode::Seq(vec![DataNode::Seq(exps), encode_element(c, mode)])
            })
            .collect(),
    )
}

/// Long-term: sparse `(degree, coefficient)` pairs in ascending degree.
/// Interprocess: dense coefficients from degree 0 up, zeros included.
pub fn encode_univariate(p: &Polynomial, mode: Mode) -> DataNode {
    debug_assert!(p.parent().is_univariate());
    match mode {
        Mode::LongTerm => DataNode::Seq(
            p.terms()
                .iter()
                .rev()
                .map(|(m, c)| DataNode::Seq(vec![DataNode::text(m.exponents()[0].to_string()), encode_element(c, mode)]))
                .collect(),
        ),
        Mode::Ipc => {
            let Some(deg) = p.degree() else {
                return DataNode::Seq(vec![]);
            };
            let zero = encode_element(&p.parent().base().unwrap().zero(), mode);
            let mut dense = vec![zero; deg as usize + 1];
            for (m, c) in p.terms() {
                dense[m.exponents()[0] as usize] = encode_element(c, mode);
            }
            DataNode::Seq(dense)
        }
    }
}

pub fn load<'a>(doc: &'a MrdiDocument, state: &mut DeserializerState<'a>) -> Result<Value> {
    let doc_mode = if doc.is_long_term() { Mode::LongTerm } else { Mode::Ipc };
    if doc_mode != state.mode() {
        return Err(Error::Validation(format!(
            "mode violation: {doc_mode:?} document read with a {:?} deserializer",
            state.mode()
        )));
    }
    if let Some(ns) = &doc.ns {
        let ours = NamespaceRecord::current();
        if ns.major_version() != ours.major_version() {
            log::warn!(
                "document written by {} {} (major version differs from {} {}); loading without upgrade",
                ns.system,
                ns.version,
                ours.system,
                ours.version
            );
        }
    }
    state.attach(doc);
    decode_value(&doc.type_tree, &doc.data, state, "/data")
}

/// Loads a document, inferring the mode from the presence of `_ns`.
pub fn load_value(doc: &MrdiDocument, global: &GlobalSerializerState) -> Result<Value> {
    let mode = if doc.is_long_term() { Mode::LongTerm } else { Mode::Ipc };
    load(doc, &mut DeserializerState::new(mode, global))
}

/// Parses (with validation) and loads.
pub fn load_bytes(bytes: &[u8], global: &GlobalSerializerState) -> Result<Value> {
    load_value(&super::document::parse_text(bytes)?, global)
}

fn text<'d>(d: &'d DataNode, path: &str) -> Result<&'d str> {
    match d {
        DataNode::Text(s) => Ok(s),
        _ => Err(Error::decode(path, "expected a text scalar")),
    }
}

fn seq<'d>(d: &'d DataNode, path: &str) -> Result<&'d [DataNode]> {
    match d {
        DataNode::Seq(items) => Ok(items),
        _ => Err(Error::decode(path, "expected a sequence")),
    }
}

fn field<'d>(d: &'d DataNode, key: &str, path: &str) -> Result<&'d DataNode> {
    d.get(key)
        .ok_or_else(|| Error::decode(path, format!("missing `{key}`")))
}

fn parse_int(d: &DataNode, path: &str) -> Result<BigInt> {
    let s = text(d, path)?;
    BigInt::from_str(s).map_err(|_| Error::decode(path, format!("`{s}` is not an integer")))
}

fn parse_usize(d: &DataNode, path: &str) -> Result<usize> {
    let s = text(d, path)?;
    s.parse()
        .map_err(|_| Error::decode(path, format!("`{s}` is not a nonnegative integer")))
}

fn parse_rational(d: &DataNode, path: &str) -> Result<BigRational> {
    let s = text(d, path)?;
    let bad = || Error::decode(path, format!("`{s}` is not a rational number"));
    match s.split_once('/') {
        None => BigInt::from_str(s).map(BigRational::from_integer).map_err(|_| bad()),
        Some((n, den)) => {
            let n = BigInt::from_str(n).map_err(|_| bad())?;
            let den = BigInt::from_str(den).map_err(|_| bad())?;
            if den.is_zero() {
                return Err(Error::decode(path, "zero denominator"));
            }
            Ok(BigRational::new(n, den))
        }
    }
}

fn param_ref(t: &TypeNode, path: &str) -> Result<uuid::Uuid> {
    match &t.params {
        Some(Param::Ref(u)) => Ok(*u),
        _ => Err(Error::decode(path, format!("`{}` needs a context UUID parameter", t.name))),
    }
}

fn decode_value(t: &TypeNode, data: &DataNode, state: &mut DeserializerState<'_>, path: &str) -> Result<Value> {
    let mode = state.mode();
    Ok(match t.name.as_str() {
        "ZZRingElem" => Value::Integer(parse_int(data, path)?),
        "QQFieldElem" => Value::Rational(parse_rational(data, path)?),
        "FpFieldElem" => {
            let field = state.resolve(param_ref(t, path)?)?;
            if field.modulus().is_none() {
                return Err(Error::decode(path, format!("{field} is not a prime field")));
            }
            match decode_element(&field, data, mode, path)? {
                Element::Residue(value) => Value::Residue { field, value },
                _ => unreachable!(),
            }
        }
        "PolyRingElem" | "MPolyRingElem" => {
            let ring = state.resolve(param_ref(t, path)?)?;
            let univariate = t.name == "PolyRingElem";
            if !ring.is_polynomial_ring() || ring.is_univariate() != univariate {
                return Err(Error::decode(path, format!("`{}` parent {ring} has the wrong kind", t.name)));
            }
            match decode_element(&ring, data, mode, path)? {
                Element::Poly(p) => Value::Polynomial(p),
                _ => unreachable!(),
            }
        }
        "Matrix" => {
            let param = t
                .params
                .as_ref()
                .ok_or_else(|| Error::decode(path, "Matrix needs a ring parameter"))?;
            let ring = resolve_ring_param(param, path, &mut |u| state.resolve(u))?;
            let rows = parse_usize(field(data, "rows", path)?, &format!("{path}/rows"))?;
            let cols = parse_usize(field(data, "cols", path)?, &format!("{path}/cols"))?;
            let epath = format!("{path}/entries");
            let items = seq(field(data, "entries", path)?, &epath)?;
            if items.len() != rows * cols {
                return Err(Error::decode(&epath, format!("{} entries for a {rows}x{cols} matrix", items.len())));
            }
            let entries = items
                .iter()
                .enumerate()
                .map(|(i, d)| decode_element(&ring, d, mode, &format!("{epath}/{i}")))
                .collect::<Result<Vec<_>>>()?;
            Value::Matrix(ExactMatrix::new(&ring, rows, cols, entries)?)
        }
        "Vector" => {
            let items = seq(data, path)?;
            match &t.params {
                None if items.is_empty() => Value::Vector(vec![]),
                None => return Err(Error::decode(path, "nonempty Vector without an element type")),
                Some(Param::Type(inner)) => Value::Vector(
                    items
                        .iter()
                        .enumerate()
                        .map(|(i, d)| decode_value(inner, d, state, &format!("{path}/{i}")))
                        .collect::<Result<Vec<_>>>()?,
                ),
                Some(_) => return Err(Error::decode(path, "Vector parameter must be a type node")),
            }
        }
        "Tuple" => {
            let items = seq(data, path)?;
            let entries = match &t.params {
                Some(Param::Map(entries)) => entries.as_slice(),
                None => &[],
                Some(_) => return Err(Error::decode(path, "Tuple parameter must be a map")),
            };
            if entries.len() != items.len() {
                return Err(Error::decode(path, format!("{} item types for {} items", entries.len(), items.len())));
            }
            let mut out = Vec::with_capacity(items.len());
            for (i, ((key, p), d)) in entries.iter().zip(items).enumerate() {
                if *key != i.to_string() {
                    return Err(Error::decode(path, format!("tuple key `{key}` out of order")));
                }
                let Param::Type(inner) = p else {
                    return Err(Error::decode(path, "tuple item parameter must be a type node"));
                };
                out.push(decode_value(inner, d, state, &format!("{path}/{i}"))?);
            }
            Value::Tuple(out)
        }
        "MonomialMap" => {
            let get = |k: &str| match t.params.as_ref().and_then(|p| p.get(k)) {
                Some(Param::Ref(u)) => Ok(*u),
                _ => Err(Error::decode(path, format!("MonomialMap needs a `{k}` UUID"))),
            };
            let (d, c) = (get("domain")?, get("codomain")?);
            let source = state.resolve(d)?;
            let target = state.resolve(c)?;
            if !target.is_polynomial_ring() {
                return Err(Error::decode(path, format!("codomain {target} is not a polynomial ring")));
            }
            let images = seq(data, path)?
                .iter()
                .enumerate()
                .map(|(i, d)| match decode_element(&target, d, mode, &format!("{path}/{i}"))? {
                    Element::Poly(p) => Ok(p),
                    _ => unreachable!(),
                })
                .collect::<Result<Vec<_>>>()?;
            Value::MonomialMap(MonomialMap::new(&source, &target, images)?)
        }
        "ZZRing" => Value::Ring(ContextHandle::integers()),
        "QQField" => Value::Ring(ContextHandle::rationals()),
        "FpField" | "PolyRing" | "MPolyRing" => {
            let ring = state.resolve(param_ref(t, path)?)?;
            if ring_tag(&ring) != t.name {
                return Err(Error::decode(path, format!("`{}` resolves to {ring}", t.name)));
            }
            Value::Ring(ring)
        }
        other => return Err(Error::UnsupportedType(other.to_string())),
    })
}

fn decode_element(ring: &ContextHandle, d: &DataNode, mode: Mode, path: &str) -> Result<Element> {
    match ring.descriptor() {
        RingDescriptor::Integers => Ok(Element::Integer(parse_int(d, path)?)),
        RingDescriptor::Rationals => Ok(Element::Rational(parse_rational(d, path)?)),
        RingDescriptor::PrimeField(p) => {
            let s = text(d, path)?;
            let r: u64 = s
                .parse()
                .map_err(|_| Error::decode(path, format!("`{s}` is not a residue")))?;
            if r >= *p {
                return Err(Error::decode(path, format!("residue {r} not reduced modulo {p}")));
            }
            Ok(Element::Residue(r))
        }
        RingDescriptor::Univariate { base, .. } => {
            let items = seq(d, path)?;
            let mut terms = Vec::with_capacity(items.len());
            match mode {
                Mode::LongTerm => {
                    for (i, item) in items.iter().enumerate() {
                        let ip = format!("{path}/{i}");
                        let pair = seq(item, &ip)?;
                        if pair.len() != 2 {
                            return Err(Error::decode(&ip, "expected a (degree, coefficient) pair"));
                        }
                        let deg = parse_usize(&pair[0], &format!("{ip}/0"))? as u32;
                        terms.push((vec![deg], decode_element(base, &pair[1], mode, &format!("{ip}/1"))?));
                    }
                }
                Mode::Ipc => {
                    for (i, item) in items.iter().enumerate() {
                        let c = decode_element(base, item, mode, &format!("{path}/{i}"))?;
                        terms.push((vec![i as u32], c));
                    }
                }
            }
            Ok(Element::Poly(Polynomial::new(ring, terms)?))
        }
        RingDescriptor::Multivariate { base, symbols } => {
            let items = seq(d, path)?;
            let mut terms = Vec::with_capacity(items.len());
            for (i, item) in items.iter().enumerate() {
                let ip = format!("{path}/{i}");
                let pair = seq(item, &ip)?;
                if pair.len() != 2 {
                    return Err(Error::decode(&ip, "expected an (exponents, coefficient) pair"));
                }
                let exps = seq(&pair[0], &format!("{ip}/0"))?
                    .iter()
                    .enumerate()
                    .map(|(j, e)| parse_usize(e, &format!("{ip}/0/{j}")).map(|x| x as u32))
                    .collect::<Result<Vec<_>>>()?;
                if exps.len() != symbols.len() {
                    return Err(Error::decode(
                        &format!("{ip}/0"),
                        format!("{} exponents for {} variables", exps.len(), symbols.len()),
                    ));
                }
                terms.push((exps, decode_element(base, &pair[1], mode, &format!("{ip}/1"))?));
            }
            Ok(Element::Poly(Polynomial::new(ring, terms)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mrdi::document::parse_text;

    fn cubic() -> Polynomial {
        let qq = ContextHandle::rationals();
        let r = ContextHandle::multivariate(&qq, &["x", "y"]).unwrap();
        let q = |n: i64| Element::Rational(BigRational::from_integer(n.into()));
        Polynomial::new(&r, vec![(vec![3, 0], q(1)), (vec![1, 1], q(-1)), (vec![0, 0], q(1))]).unwrap()
    }

    fn t_poly(coeffs: &[(u32, i64)]) -> Polynomial {
        let zt = ContextHandle::univariate(&ContextHandle::integers(), "t").unwrap();
        Polynomial::new(&zt, coeffs.iter().map(|&(d, c)| (vec![d], Element::Integer(c.into())))).unwrap()
    }

    #[test]
    fn long_term_polynomial_layout() {
        let g = GlobalSerializerState::new();
        let doc = save_value(&Value::Polynomial(cubic()), Mode::LongTerm, &g).unwrap();
        assert_eq!(doc.type_tree.name, "MPolyRingElem");
        let ring_uuid = doc.type_tree.uuids()[0];
        let refs = doc.refs.as_ref().unwrap();
        assert_eq!(refs.len(), 1);
        let ring_doc = &refs[&ring_uuid];
        assert_eq!(ring_doc.type_tree.name, "MPolyRing");
        let expect = DataNode::Seq(vec![
            DataNode::Seq(vec![DataNode::Seq(vec![DataNode::text("3"), DataNode::text("0")]), DataNode::text("1")]),
            DataNode::Seq(vec![DataNode::Seq(vec![DataNode::text("1"), DataNode::text("1")]), DataNode::text("-1")]),
            DataNode::Seq(vec![DataNode::Seq(vec![DataNode::text("0"), DataNode::text("0")]), DataNode::text("1")]),
        ]);
        assert_eq!(doc.data, expect);
        let back = load_value(&parse_text(&serialize_text(&doc)).unwrap(), &g).unwrap();
        assert_eq!(back, Value::Polynomial(cubic()));
    }

    #[test]
    fn univariate_encodings() {
        let p = t_poly(&[(3, 1), (0, 2)]);
        let pair = |d: &str, c: &str| DataNode::Seq(vec![DataNode::text(d), DataNode::text(c)]);
        assert_eq!(encode_univariate(&p, Mode::LongTerm), DataNode::Seq(vec![pair("0", "2"), pair("3", "1")]));
        assert_eq!(
            encode_univariate(&p, Mode::Ipc),
            DataNode::Seq(["2", "0", "0", "1"].iter().map(|s| DataNode::text(*s)).collect())
        );
        let zero = t_poly(&[]);
        assert_eq!(encode_univariate(&zero, Mode::LongTerm), DataNode::Seq(vec![]));
        assert_eq!(encode_univariate(&zero, Mode::Ipc), DataNode::Seq(vec![]));
    }

    #[test]
    fn ipc_requires_preloaded_context() {
        let g = GlobalSerializerState::new();
        let v = Value::Polynomial(cubic());
        assert!(matches!(save_value(&v, Mode::Ipc, &g), Err(Error::ContextNotPreloaded(_))));
        g.register_context(cubic().parent());
        let doc = save_value(&v, Mode::Ipc, &g).unwrap();
        assert!(doc.ns.is_none() && doc.refs.is_none());
        let text = String::from_utf8(serialize_text(&doc)).unwrap();
        assert!(!text.contains("_ns") && !text.contains("_refs"));
        assert_eq!(load_value(&doc, &g).unwrap(), v);
        let fresh = GlobalSerializerState::new();
        assert!(matches!(load_value(&doc, &fresh), Err(Error::ContextNotPreloaded(_))));
    }

    #[test]
    fn shared_context_across_documents() {
        let writer = GlobalSerializerState::new();
        let a = save_value(&Value::Polynomial(cubic()), Mode::LongTerm, &writer).unwrap();
        let b = save_value(&Value::Polynomial(cubic().pow(2)), Mode::LongTerm, &writer).unwrap();
        assert_eq!(a.type_tree.uuids(), b.type_tree.uuids());
        let reader = GlobalSerializerState::new();
        let pa = load_value(&a, &reader).unwrap();
        let pb = load_value(&b, &reader).unwrap();
        assert_eq!(pa.as_polynomial().unwrap().parent().id(), pb.as_polynomial().unwrap().parent().id());
        assert_eq!(reader.uuid_of(pa.as_polynomial().unwrap().parent()), Some(a.type_tree.uuids()[0]));
    }

    #[test]
    fn dedups_context_refs() {
        let g = GlobalSerializerState::new();
        let items: Vec<Value> = (0..100).map(|k| Value::Polynomial(cubic().pow(k % 3))).collect();
        let doc = save_value(&Value::Vector(items), Mode::LongTerm, &g).unwrap();
        assert_eq!(doc.refs.unwrap().len(), 1);
    }

    #[test]
    fn nested_ring_refs_point_at_base() {
        let g = GlobalSerializerState::new();
        let zt = ContextHandle::univariate(&ContextHandle::integers(), "t").unwrap();
        let ztu = ContextHandle::univariate(&zt, "u").unwrap();
        let p = Polynomial::new(&ztu, vec![(vec![2], Element::Poly(t_poly(&[(1, 3)])))]).unwrap();
        let doc = save_value(&Value::Polynomial(p.clone()), Mode::LongTerm, &g).unwrap();
        let refs = doc.refs.as_ref().unwrap();
        assert_eq!(refs.len(), 2);
        let outer = g.uuid_of(&ztu).unwrap();
        let inner = g.uuid_of(&zt).unwrap();
        assert_eq!(refs[&outer].type_tree.uuids(), vec![inner]);
        assert_eq!(load_value(&doc, &GlobalSerializerState::new()).unwrap(), Value::Polynomial(p));
    }

    #[test]
    fn decode_errors_carry_paths() {
        let g = GlobalSerializerState::new();
        let bad = br#"{"_type":{"name":"Vector","params":{"name":"ZZRingElem"}},"data":["1","x"]}"#;
        let err = load_bytes(bad, &g).unwrap_err();
        assert!(matches!(err, Error::Decode { ref path, .. } if path == "/data/1"), "{err}");
        let unknown = parse_text(br#"{"_type":{"name":"Float64"},"data":"1"}"#);
        assert!(unknown.is_err());
        let doc = crate::mrdi::document::parse_text_unchecked(br#"{"_type":{"name":"Float64"},"data":"1"}"#).unwrap();
        assert!(matches!(load_value(&doc, &g), Err(Error::UnsupportedType(_))));
    }

    #[test]
    fn heterogeneous_vector_rejected() {
        let g = GlobalSerializerState::new();
        let v = Value::Vector(vec![Value::from(1), Value::Polynomial(cubic())]);
        assert!(save_value(&v, Mode::LongTerm, &g).is_err());
    }
}
