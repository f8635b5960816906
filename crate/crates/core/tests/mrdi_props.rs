mod common;

use std::collections::BTreeSet;

use common::*;
use mrdi_core::algebra::{ContextHandle, Polynomial};
use mrdi_core::mrdi::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn value(seed: u64) -> Value {
    random_value(&mut ChaCha8Rng::seed_from_u64(seed), 2)
}

fn long_term_round_trip(v: &Value) -> Value {
    let writer = GlobalSerializerState::new();
    let bytes = save_bytes(v, Mode::LongTerm, &writer).unwrap();
    load_bytes(&bytes, &GlobalSerializerState::new()).unwrap()
}

fn check_parents(a: &Value, b: &Value) {
    let ids = |v: &Value| v.contexts().iter().map(ContextHandle::id).collect::<Vec<_>>();
    assert_eq!(ids(a), ids(b));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn round_trip(seed in any::<u64>()) {
        let v = value(seed);
        let back = long_term_round_trip(&v);
        prop_assert_eq!(&back, &v);
        check_parents(&back, &v);
    }

    #[test]
    fn modes_agree(seed in any::<u64>()) {
        let v = value(seed);
        let g = GlobalSerializerState::new();
        for c in v.contexts() {
            g.register_context(&c);
        }
        let ipc = save_value(&v, Mode::Ipc, &g).unwrap();
        prop_assert!(ipc.ns.is_none() && ipc.refs.is_none());
        let from_ipc = load_value(&parse_text(&serialize_text(&ipc)).unwrap(), &g).unwrap();
        let from_lt = load_bytes(&save_bytes(&v, Mode::LongTerm, &g).unwrap(), &g).unwrap();
        prop_assert_eq!(&from_ipc, &from_lt);
        prop_assert_eq!(&from_ipc, &v);
    }

    #[test]
    fn saves_are_deterministic(seed in any::<u64>()) {
        let v = value(seed);
        let g = GlobalSerializerState::new();
        let a = save_bytes(&v, Mode::LongTerm, &g).unwrap();
        let b = save_bytes(&v, Mode::LongTerm, &g).unwrap();
        prop_assert_eq!(&a, &b);
        // Text form is canonical: parse then serialize is the identity on bytes.
        prop_assert_eq!(serialize_text(&parse_text(&a).unwrap()), a);
    }

    #[test]
    fn refs_are_closed_and_acyclic(seed in any::<u64>()) {
        let v = value(seed);
        let doc = save_value(&v, Mode::LongTerm, &GlobalSerializerState::new()).unwrap();
        prop_assert!(validate_document(&doc).is_ok());
        let refs = doc.refs.as_ref().unwrap();
        let mut mentioned: Vec<_> = doc.type_tree.uuids();
        for r in refs.values() {
            prop_assert!(r.ns.is_none() && r.refs.is_none());
            for u in r.type_tree.uuids() {
                prop_assert!(refs.contains_key(&u));
                mentioned.push(u);
            }
        }
        // Nothing extra is emitted.
        let mentioned: BTreeSet<_> = mentioned.into_iter().collect();
        prop_assert_eq!(mentioned, refs.keys().copied().collect::<BTreeSet<_>>());
    }

    #[test]
    fn univariate_encodings_decode_equal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ring = ContextHandle::univariate(&random_ring(&mut rng), "w").unwrap();
        let p = random_poly(&mut rng, &ring, 6, 20);
        let g = GlobalSerializerState::new();
        g.register_context(&ring);
        let v = Value::Polynomial(p.clone());
        let sparse = load_value(&save_value(&v, Mode::LongTerm, &g).unwrap(), &g).unwrap();
        let dense = load_value(&save_value(&v, Mode::Ipc, &g).unwrap(), &g).unwrap();
        prop_assert_eq!(&sparse, &dense);
        prop_assert_eq!(sparse, v);
        // Dense has exactly deg + 1 entries, sparse exactly one pair per term.
        match (encode_univariate(&p, Mode::Ipc), encode_univariate(&p, Mode::LongTerm)) {
            (DataNode::Seq(d), DataNode::Seq(s)) => {
                prop_assert_eq!(d.len(), p.degree().map_or(0, |x| x as usize + 1));
                prop_assert_eq!(s.len(), p.len());
            }
            _ => prop_assert!(false),
        }
    }
}

#[test]
fn hundred_polynomials_one_ref() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ring = qq_ring(&["x", "y"]);
    let items = (0..100).map(|_| Value::Polynomial(random_poly(&mut rng, &ring, 4, 4))).collect();
    let doc = save_value(&Value::Vector(items), Mode::LongTerm, &GlobalSerializerState::new()).unwrap();
    assert_eq!(doc.refs.unwrap().len(), 1);
}

#[test]
fn zero_polynomial_has_empty_data() {
    let doc = save_value(
        &Value::Polynomial(Polynomial::zero(&qq_ring(&["x", "y"]))),
        Mode::LongTerm,
        &GlobalSerializerState::new(),
    )
    .unwrap();
    assert_eq!(doc.data, DataNode::Seq(vec![]));
}

#[test]
fn schema_rejections() {
    assert!(matches!(parse_text(br#"{"data": 5}"#), Err(mrdi_core::Error::Schema(_))));
    assert!(parse_text(br#"{"_type":{"name":"ZZRingElem"},"data":"1","extra":1}"#).is_err());
    assert!(parse_text(b"{not json").is_err());
    let dangling = br#"{"_ns":{"system":"s","version":"1.0.0"},"_type":{"name":"PolyRingElem","params":"4a8b3c2e-9d1f-4e6a-8b7c-5d2e1f0a9b3c"},"_refs":{},"data":[]}"#;
    match parse_text(dangling) {
        Err(mrdi_core::Error::Invalid(issues)) => assert!(issues[0].message.contains("dangling")),
        other => panic!("expected a validation failure, got {other:?}"),
    }
}

#[test]
fn nested_ring_registers_base_first() {
    let g = GlobalSerializerState::new();
    let inner = zt();
    let outer = ContextHandle::univariate(&inner, "u").unwrap();
    let u_outer = g.register_context(&outer);
    let u_inner = g.uuid_of(&inner).unwrap();
    assert_ne!(u_inner, u_outer);
    assert_eq!(g.register_context(&outer), u_outer);
    assert_eq!(g.ref_document(u_outer).unwrap().type_tree.uuids(), vec![u_inner]);
    assert_eq!(u_outer.get_version_num(), 4);
}

#[test]
fn reordered_keys_still_load() {
    let g = GlobalSerializerState::new();
    let text = br#"{"data":"12","_type":{"name":"ZZRingElem"}}"#;
    assert_eq!(load_bytes(text, &g).unwrap(), Value::from(12));
}
