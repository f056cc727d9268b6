//! Printing and re-parsing preserves queries, relations, propositions,
//! signatures, objects and values in every concrete syntax.

mod common;

use common::{gen_object, gen_relation, QueryGen, BASES};
use proptest::prelude::*;
use qmt::frontend::xmlsyntax::{
    object_from_xml, object_to_xml, parse_element, prop_from_xml, prop_to_xml, value_from_xml,
    value_to_xml,
};
use qmt::frontend::{
    parse_prop, parse_query, parse_query_xml, parse_relation, parse_signature, print_prop,
    print_query, query_to_xml,
};
use qmt::kernel::Value;
use qmt::object::Object;
use qmt::xml::XmlElement;
use rand::seq::SliceRandom;
use rand::Rng;

fn gen_value(rng: &mut impl Rng, depth: usize, allow_set: bool) -> Value {
    match rng.gen_range(0..if depth == 0 { 3 } else { 5 }) {
        0 => Value::uri(["urn:x?A", "a <b> & \"c\"", "ü?ß", "0"][rng.gen_range(0..4)]),
        1 => Value::Obj(gen_object(rng, 2, &[])),
        2 => Value::Xml(
            XmlElement::new("m")
                .attr("k", "v&<")
                .child(XmlElement::new("i").text("x < y")),
        ),
        3 => {
            let n = rng.gen_range(2..=3);
            Value::tuple((0..n).map(|_| gen_value(rng, 0, false)).collect())
        }
        _ if allow_set => {
            let n = rng.gen_range(0..=4);
            Value::set((0..n).map(|_| gen_value(rng, depth - 1, false)))
        }
        _ => gen_value(rng, depth - 1, false),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn text_queries_roundtrip(seed in any::<u64>(), depth in 0usize..5) {
        let mut rng = common::rng(seed);
        let mut g = QueryGen::new(&mut rng);
        g.syntax_only = true;
        let (q, _) = g.closed(depth);
        let printed = print_query(&q);
        let back = parse_query(&printed);
        prop_assert!(back.is_ok(), "{printed}: {:?}", back.err());
        prop_assert_eq!(back.unwrap(), q, "{}", printed);
    }

    #[test]
    fn xml_queries_roundtrip(seed in any::<u64>(), depth in 0usize..5) {
        let mut rng = common::rng(seed);
        let mut g = QueryGen::new(&mut rng);
        g.syntax_only = true;
        let (q, _) = g.closed(depth);
        let printed = query_to_xml(&q).to_string();
        let back = parse_query_xml(&printed);
        prop_assert!(back.is_ok(), "{printed}: {:?}", back.err());
        prop_assert_eq!(back.unwrap(), q, "{}", printed);
    }

    #[test]
    fn propositions_roundtrip(seed in any::<u64>(), depth in 0usize..4) {
        let mut rng = common::rng(seed);
        let mut g = QueryGen::new(&mut rng);
        let f = g.prop(&Vec::new(), depth);
        let text = print_prop(&f);
        prop_assert_eq!(parse_prop(&text).unwrap(), f.clone(), "{}", text);
        let xml = prop_to_xml(&f).to_string();
        prop_assert_eq!(prop_from_xml(&parse_element(&xml).unwrap()).unwrap(), f);
    }

    #[test]
    fn relations_roundtrip(seed in any::<u64>(), depth in 0usize..4) {
        let mut rng = common::rng(seed);
        let from = *BASES.choose(&mut rng).unwrap();
        let to = *BASES.choose(&mut rng).unwrap();
        let r = gen_relation(&mut rng, from, to, depth);
        let text = qmt::frontend::text::print_relation(&r);
        prop_assert_eq!(parse_relation(&text).unwrap(), r, "{}", text);
    }

    #[test]
    fn objects_roundtrip(seed in any::<u64>(), depth in 0usize..5) {
        let mut rng = common::rng(seed);
        let o = gen_object(&mut rng, depth, &[]);
        let json = serde_json::to_string(&o).unwrap();
        let back: Object = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &o);
        let xml = object_to_xml(&o).to_string();
        prop_assert_eq!(object_from_xml(&parse_element(&xml).unwrap()).unwrap(), o);
    }

    #[test]
    fn values_roundtrip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let v = gen_value(&mut rng, 2, true);
        let json = serde_json::to_string(&v).unwrap();
        let back: Value = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &v, "{}", json);
        let xml = value_to_xml(&v).to_string();
        prop_assert_eq!(value_from_xml(&parse_element(&xml).unwrap()).unwrap(), v, "{}", xml);
    }
}

#[test]
fn signature_text_and_xml_roundtrip() {
    use qmt::frontend::text::print_signature;
    use qmt::frontend::xmlsyntax::{decls_from_xml, decls_to_xml};
    for decls in [common::signature_decls(), qmt::mmtlib::signature_decls()] {
        let text = print_signature(&decls);
        assert_eq!(parse_signature(&text).unwrap(), decls, "{text}");
        let xml = decls_to_xml(&decls).to_string();
        assert_eq!(decls_from_xml(&parse_element(&xml).unwrap()).unwrap(), decls, "{xml}");
    }
}
