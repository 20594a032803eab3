//! XML parsing.
//!
//! Model and dimension documents are parsed strictly: structural surprises
//! are errors with a byte offset. Fact documents are parsed leniently, since
//! dirty data is part of the format: children may arrive in any order,
//! missing slots stay missing, and unknown elements or unparseable values
//! degrade to [`ParseWarning`]s rather than failures.
//!
//! Member attributes are accepted in either encoding: XML attributes on the
//! `<instance>` element, or child elements whose text is the value. Parents
//! may be a `parent` attribute or repeated `<parent ref="..."/>` children.

use quick_xml::events::{BytesStart, BytesText, Event};
use quick_xml::Reader;

use crate::fact::{Fact, Slot};
use crate::model::{DimRef, DimensionDef, FactDef, LevelDef, WarehouseModel};
use crate::value::parse_cents;

use super::{CodecError, InstanceData, LevelData, ParseWarning, WarehouseDocuments};

type XReader<'a> = Reader<&'a [u8]>;

/// One dimension document, structurally decoded but not yet interpreted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedDimension {
    pub id: String,
    pub levels: Vec<LevelData>,
}

fn offset(r: &XReader) -> u64 {
    r.buffer_position() as u64
}

fn xml_err(r: &XReader, e: impl std::fmt::Display) -> CodecError {
    CodecError::Xml { offset: offset(r), message: e.to_string() }
}

fn malformed<T>(r: &XReader, msg: impl Into<String>) -> Result<T, CodecError> {
    Err(CodecError::Malformed { offset: offset(r), message: msg.into() })
}

fn missing(r: &XReader, what: &str) -> CodecError {
    CodecError::Malformed { offset: offset(r), message: what.to_string() }
}

fn read<'b>(r: &mut XReader, buf: &'b mut Vec<u8>) -> Result<Event<'b>, CodecError> {
    buf.clear();
    let pos = r.buffer_position() as u64;
    r.read_event_into(buf)
        .map_err(|e| CodecError::Xml { offset: pos, message: e.to_string() })
}

fn name_of(e: &BytesStart) -> String {
    String::from_utf8_lossy(e.name().as_ref()).into_owned()
}

fn end_name(e: &quick_xml::events::BytesEnd) -> String {
    String::from_utf8_lossy(e.name().as_ref()).into_owned()
}

fn attrs_of(r: &XReader, e: &BytesStart) -> Result<Vec<(String, String)>, CodecError> {
    let mut out = Vec::new();
    for a in e.attributes() {
        let a = a.map_err(|err| xml_err(r, err))?;
        let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
        let value = a
            .decoded_and_normalized_value(quick_xml::XmlVersion::Implicit1_0, r.decoder())
            .map_err(|err| xml_err(r, err))?
            .into_owned();
        out.push((key, value));
    }
    Ok(out)
}

fn take_attr(attrs: &mut Vec<(String, String)>, key: &str) -> Option<String> {
    let idx = attrs.iter().position(|(k, _)| k == key)?;
    Some(attrs.remove(idx).1)
}

fn text_str(r: &XReader, t: &BytesText) -> Result<String, CodecError> {
    let raw = std::str::from_utf8(t.as_ref()).map_err(|e| xml_err(r, e))?;
    let un = quick_xml::escape::unescape(raw).map_err(|e| xml_err(r, e))?;
    Ok(un.into_owned())
}

fn is_ws(t: &BytesText) -> bool {
    t.as_ref().iter().all(u8::is_ascii_whitespace)
}

/// Resolves a character or predefined entity reference event to its text.
fn general_ref(r: &XReader, e: &quick_xml::events::BytesRef) -> Result<String, CodecError> {
    if let Some(ch) = e.resolve_char_ref().map_err(|err| xml_err(r, err))? {
        return Ok(ch.to_string());
    }
    let name = e.decode().map_err(|err| xml_err(r, err))?;
    match quick_xml::escape::resolve_predefined_entity(&name) {
        Some(s) => Ok(s.to_string()),
        None => malformed(r, format!("unknown entity &{name};")),
    }
}

fn skip_subtree(r: &mut XReader, e: &BytesStart) -> Result<(), CodecError> {
    let mut buf = Vec::new();
    let pos = offset(r);
    r.read_to_end_into(e.name(), &mut buf)
        .map(|_| ())
        .map_err(|err| CodecError::Xml { offset: pos, message: err.to_string() })
}

/// Reads the text content of a leaf element up to its end tag.
fn read_element_text(r: &mut XReader, tag: &str) -> Result<String, CodecError> {
    let mut buf = Vec::new();
    let mut out = String::new();
    loop {
        let ev = read(r, &mut buf)?;
        match ev {
            Event::Text(t) => out.push_str(&text_str(r, &t)?),
            Event::GeneralRef(e) => out.push_str(&general_ref(r, &e)?),
            Event::CData(c) => {
                out.push_str(std::str::from_utf8(c.as_ref()).map_err(|e| xml_err(r, e))?)
            }
            Event::End(e) if end_name(&e) == tag => return Ok(out),
            Event::Comment(_) => {}
            Event::Eof => return malformed(r, "unexpected end of document"),
            _ => return malformed(r, format!("unexpected content inside <{tag}>")),
        }
    }
}

/// Parses the warehouse model document and validates the result.
pub fn parse_model(bytes: &[u8]) -> Result<WarehouseModel, CodecError> {
    let mut r = Reader::from_reader(bytes);
    let mut buf = Vec::new();
    let mut root_seen = false;
    let mut fact: Option<FactDef> = None;
    let mut dimensions: Vec<DimensionDef> = Vec::new();
    loop {
        let ev = read(&mut r, &mut buf)?;
        let is_start = matches!(&ev, Event::Start(_));
        match ev {
            Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => {}
            Event::Text(t) => {
                if !is_ws(&t) {
                    return malformed(&r, "unexpected text in model document");
                }
            }
            Event::Start(e) | Event::Empty(e) => {
                let name = name_of(&e);
                if !root_seen {
                    if name != "xweb-dw-model" {
                        return malformed(&r, format!("expected <xweb-dw-model> root, found <{name}>"));
                    }
                    root_seen = true;
                    continue;
                }
                let mut attrs = attrs_of(&r, &e)?;
                match name.as_str() {
                    "fact" => {
                        let id = take_attr(&mut attrs, "id").ok_or_else(|| missing(&r, "fact without id"))?;
                        let path =
                            take_attr(&mut attrs, "path").ok_or_else(|| missing(&r, "fact without path"))?;
                        let def = if is_start {
                            parse_fact_body(&mut r, id, path)?
                        } else {
                            FactDef { id, path, measures: Vec::new(), dimrefs: Vec::new() }
                        };
                        if fact.replace(def).is_some() {
                            return malformed(&r, "more than one fact declaration");
                        }
                    }
                    "dimension" => {
                        let id = take_attr(&mut attrs, "id")
                            .ok_or_else(|| missing(&r, "dimension without id"))?;
                        let path = take_attr(&mut attrs, "path")
                            .ok_or_else(|| missing(&r, "dimension without path"))?;
                        let def = if is_start {
                            parse_dimension_body(&mut r, id, path)?
                        } else {
                            DimensionDef { id, path, levels: Vec::new() }
                        };
                        dimensions.push(def);
                    }
                    other => return malformed(&r, format!("unexpected <{other}> in model document")),
                }
            }
            Event::End(_) => {}
            Event::Eof => break,
            Event::CData(_) => return malformed(&r, "unexpected CDATA in model document"),
            Event::GeneralRef(_) => return malformed(&r, "unexpected entity reference"),
        }
    }
    if !root_seen {
        return malformed(&r, "empty model document");
    }
    let Some(fact) = fact else {
        return malformed(&r, "model document has no fact declaration");
    };
    let model = WarehouseModel { fact, dimensions };
    let problems = crate::model::validate_model(&model);
    if !problems.is_empty() {
        return Err(CodecError::InvalidModel(problems));
    }
    Ok(model)
}

/// Body of `<fact>`: measures and dimension references. The caller has
/// consumed the start tag; a self-closed fact never reaches here.
fn parse_fact_body(r: &mut XReader, id: String, path: String) -> Result<FactDef, CodecError> {
    let mut buf = Vec::new();
    let mut measures = Vec::new();
    let mut dimrefs = Vec::new();
    loop {
        let ev = read(r, &mut buf)?;
        let is_start = matches!(&ev, Event::Start(_));
        match ev {
            Event::Text(t) if is_ws(&t) => {}
            Event::Comment(_) => {}
            Event::Start(e) | Event::Empty(e) => {
                let name = name_of(&e);
                let mut attrs = attrs_of(r, &e)?;
                match name.as_str() {
                    "measure" => {
                        let m = take_attr(&mut attrs, "name")
                            .ok_or_else(|| missing(r, "measure without name"))?;
                        measures.push(m);
                    }
                    "dimref" => {
                        let dimension = take_attr(&mut attrs, "dimension")
                            .ok_or_else(|| missing(r, "dimref without dimension"))?;
                        let attribute = take_attr(&mut attrs, "attribute")
                            .ok_or_else(|| missing(r, "dimref without attribute"))?;
                        dimrefs.push(DimRef { dimension, attribute });
                    }
                    other => {
                        return malformed(r, format!("unexpected <{other}> in fact declaration"))
                    }
                }
                if is_start {
                    skip_subtree(r, &e)?;
                }
            }
            Event::End(e) if end_name(&e) == "fact" => {
                return Ok(FactDef { id, path, measures, dimrefs })
            }
            Event::Eof => return malformed(r, "unexpected end of document"),
            _ => return malformed(r, "unexpected content in fact declaration"),
        }
    }
}

/// Body of a model `<dimension>`: the level declarations.
fn parse_dimension_body(
    r: &mut XReader,
    id: String,
    path: String,
) -> Result<DimensionDef, CodecError> {
    let mut buf = Vec::new();
    let mut levels = Vec::new();
    loop {
        let ev = read(r, &mut buf)?;
        let is_start = matches!(&ev, Event::Start(_));
        match ev {
            Event::Text(t) if is_ws(&t) => {}
            Event::Comment(_) => {}
            Event::Start(e) | Event::Empty(e) => {
                let name = name_of(&e);
                if name != "level" {
                    return malformed(r, format!("unexpected <{name}> in dimension declaration"));
                }
                let mut attrs = attrs_of(r, &e)?;
                let level_id =
                    take_attr(&mut attrs, "id").ok_or_else(|| missing(r, "level without id"))?;
                let split = |s: Option<String>| -> Vec<String> {
                    s.map(|v| v.split_whitespace().map(str::to_string).collect())
                        .unwrap_or_default()
                };
                let rollup = split(take_attr(&mut attrs, "rollup"));
                let drilldown = split(take_attr(&mut attrs, "drilldown"));
                levels.push(LevelDef { id: level_id, rollup, drilldown });
                if is_start {
                    skip_subtree(r, &e)?;
                }
            }
            Event::End(e) if end_name(&e) == "dimension" => {
                return Ok(DimensionDef { id, path, levels })
            }
            Event::Eof => return malformed(r, "unexpected end of document"),
            _ => return malformed(r, "unexpected content in dimension declaration"),
        }
    }
}

/// Parses one dimension document into per-level instance data.
pub fn parse_dimension(bytes: &[u8]) -> Result<ParsedDimension, CodecError> {
    let mut r = Reader::from_reader(bytes);
    let mut buf = Vec::new();
    let mut id: Option<String> = None;
    let mut levels: Vec<LevelData> = Vec::new();
    loop {
        let ev = read(&mut r, &mut buf)?;
        let is_start = matches!(&ev, Event::Start(_));
        match ev {
            Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => {}
            Event::Text(t) => {
                if !is_ws(&t) {
                    return malformed(&r, "unexpected text in dimension document");
                }
            }
            Event::Start(e) | Event::Empty(e) => {
                let name = name_of(&e);
                if id.is_none() {
                    if name != "dimension" {
                        return malformed(&r, format!("expected <dimension> root, found <{name}>"));
                    }
                    let mut attrs = attrs_of(&r, &e)?;
                    id = Some(
                        take_attr(&mut attrs, "id")
                            .ok_or_else(|| missing(&r, "dimension document without id"))?,
                    );
                    continue;
                }
                if !name.eq_ignore_ascii_case("level") {
                    return malformed(&r, format!("unexpected <{name}> in dimension document"));
                }
                let mut attrs = attrs_of(&r, &e)?;
                let level_id =
                    take_attr(&mut attrs, "id").ok_or_else(|| missing(&r, "Level without id"))?;
                let instances =
                    if is_start { parse_level_instances(&mut r)? } else { Vec::new() };
                levels.push(LevelData { level: level_id, instances });
            }
            Event::End(_) => {}
            Event::Eof => break,
            _ => return malformed(&r, "unexpected content in dimension document"),
        }
    }
    match id {
        Some(id) => Ok(ParsedDimension { id, levels }),
        None => malformed(&r, "empty dimension document"),
    }
}

fn parse_level_instances(r: &mut XReader) -> Result<Vec<InstanceData>, CodecError> {
    let mut buf = Vec::new();
    let mut out = Vec::new();
    loop {
        let ev = read(r, &mut buf)?;
        let is_start = matches!(&ev, Event::Start(_));
        match ev {
            Event::Text(t) if is_ws(&t) => {}
            Event::Comment(_) => {}
            Event::Start(e) | Event::Empty(e) => {
                let name = name_of(&e);
                if name != "instance" {
                    return malformed(r, format!("unexpected <{name}> inside Level"));
                }
                let mut xml_attrs = attrs_of(r, &e)?;
                let id = take_attr(&mut xml_attrs, "id")
                    .ok_or_else(|| missing(r, "instance without id"))?;
                let mut inst = InstanceData { id, parents: Vec::new(), attrs: Vec::new() };
                if let Some(p) = take_attr(&mut xml_attrs, "parent") {
                    inst.parents.push(p);
                }
                // Remaining XML attributes are attribute-encoded members.
                inst.attrs.extend(xml_attrs);
                if is_start {
                    parse_instance_children(r, &mut inst)?;
                }
                out.push(inst);
            }
            Event::End(e) if end_name(&e).eq_ignore_ascii_case("level") => return Ok(out),
            Event::Eof => return malformed(r, "unexpected end of document"),
            _ => return malformed(r, "unexpected content inside Level"),
        }
    }
}

fn parse_instance_children(r: &mut XReader, inst: &mut InstanceData) -> Result<(), CodecError> {
    let mut buf = Vec::new();
    loop {
        let ev = read(r, &mut buf)?;
        let is_start = matches!(&ev, Event::Start(_));
        match ev {
            Event::Text(t) if is_ws(&t) => {}
            Event::Comment(_) => {}
            Event::Start(e) | Event::Empty(e) => {
                let name = name_of(&e);
                if name == "parent" {
                    let mut attrs = attrs_of(r, &e)?;
                    let p = take_attr(&mut attrs, "ref")
                        .ok_or_else(|| missing(r, "parent without ref"))?;
                    inst.parents.push(p);
                    if is_start {
                        skip_subtree(r, &e)?;
                    }
                } else if is_start {
                    let text = read_element_text(r, &name)?;
                    inst.attrs.push((name, text));
                } else {
                    inst.attrs.push((name, String::new()));
                }
            }
            Event::End(e) if end_name(&e) == "instance" => return Ok(()),
            Event::Eof => return malformed(r, "unexpected end of document"),
            _ => return malformed(r, "unexpected content inside instance"),
        }
    }
}

fn parse_slot_text(slot: Slot, text: &str) -> Option<i64> {
    let t = text.trim();
    match slot {
        Slot::TotalAmount => parse_cents(t),
        _ => t.parse::<i64>().ok(),
    }
}

/// Parses a fact document leniently; structural XML problems are still
/// errors, everything else degrades to warnings.
pub fn parse_facts(bytes: &[u8], warnings: &mut Vec<ParseWarning>) -> Result<Vec<Fact>, CodecError> {
    let mut r = Reader::from_reader(bytes);
    let mut buf = Vec::new();
    let mut root_seen = false;
    let mut facts: Vec<Fact> = Vec::new();
    loop {
        let ev = read(&mut r, &mut buf)?;
        let is_start = matches!(&ev, Event::Start(_));
        match ev {
            Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => {}
            Event::Text(_) | Event::CData(_) | Event::GeneralRef(_) => {}
            Event::Start(e) | Event::Empty(e) => {
                let name = name_of(&e);
                if !root_seen {
                    root_seen = true;
                    continue;
                }
                if name == "fact" {
                    let fact = if is_start {
                        parse_one_fact(&mut r, facts.len() as u64, warnings)?
                    } else {
                        Fact::empty()
                    };
                    facts.push(fact);
                } else {
                    warnings.push(ParseWarning::UnknownFactChild {
                        fact_index: facts.len() as u64,
                        name,
                    });
                    if is_start {
                        skip_subtree(&mut r, &e)?;
                    }
                }
            }
            Event::End(_) => {}
            Event::Eof => break,
        }
    }
    if !root_seen {
        return malformed(&r, "empty fact document");
    }
    Ok(facts)
}

fn parse_one_fact(
    r: &mut XReader,
    fact_index: u64,
    warnings: &mut Vec<ParseWarning>,
) -> Result<Fact, CodecError> {
    let mut buf = Vec::new();
    let mut f = Fact::empty();
    loop {
        let ev = read(r, &mut buf)?;
        let is_start = matches!(&ev, Event::Start(_));
        match ev {
            Event::Text(_) | Event::CData(_) | Event::Comment(_) | Event::GeneralRef(_) => {}
            Event::Start(e) | Event::Empty(e) => {
                let name = name_of(&e);
                match Slot::from_element(&name) {
                    Some(slot) => {
                        let text =
                            if is_start { read_element_text(r, &name)? } else { String::new() };
                        match parse_slot_text(slot, &text) {
                            Some(v) => f.set(slot, Some(v)),
                            None => {
                                warnings.push(ParseWarning::BadSlotValue { fact_index, name, text })
                            }
                        }
                    }
                    None => {
                        warnings.push(ParseWarning::UnknownFactChild { fact_index, name });
                        if is_start {
                            skip_subtree(r, &e)?;
                        }
                    }
                }
            }
            Event::End(e) if end_name(&e) == "fact" => return Ok(f),
            Event::End(_) => {}
            Event::Eof => return malformed(r, "unexpected end of document"),
            Event::Decl(_) | Event::PI(_) | Event::DocType(_) => {}
        }
    }
}

/// Parses all six documents and assembles the in-memory warehouse.
///
/// Document names must agree with the paths the model declares. Dimension
/// documents are strict; the fact document is lenient, and dangling
/// dimension references surface as warnings with the fact retained.
pub fn parse_warehouse(
    docs: &WarehouseDocuments,
) -> Result<(crate::warehouse::Warehouse, Vec<ParseWarning>), CodecError> {
    let model = parse_model(&docs.model.bytes)?;
    if docs.facts.name != model.fact.path {
        return Err(CodecError::PathMismatch {
            expected: model.fact.path.clone(),
            actual: docs.facts.name.clone(),
        });
    }
    let mut parsed_dims = Vec::new();
    for d in &model.dimensions {
        let doc = docs
            .dimensions
            .iter()
            .find(|x| x.name == d.path)
            .ok_or_else(|| CodecError::MissingDocument { name: d.path.clone() })?;
        let pd = parse_dimension(&doc.bytes)?;
        if pd.id != d.id {
            return Err(CodecError::Inconsistent(format!(
                "document {:?} declares dimension {:?} but the model expects {:?}",
                d.path, pd.id, d.id
            )));
        }
        parsed_dims.push(pd);
    }
    for doc in &docs.dimensions {
        if !model.dimensions.iter().any(|d| d.path == doc.name) {
            return Err(CodecError::Inconsistent(format!(
                "unexpected dimension document {:?}",
                doc.name
            )));
        }
    }
    let mut warnings = Vec::new();
    let facts = parse_facts(&docs.facts.bytes, &mut warnings)?;
    let warehouse =
        crate::warehouse::Warehouse::assemble(model, parsed_dims, facts, &mut warnings)?;
    Ok((warehouse, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::emit::{emit_dimension, emit_model};
    use crate::model::build_default_model;

    #[test]
    fn model_round_trips() {
        let m = build_default_model();
        let bytes = emit_model(&m).unwrap();
        let parsed = parse_model(&bytes).unwrap();
        assert_eq!(parsed, m);
    }

    #[test]
    fn model_rejects_stray_elements_and_reports_offset() {
        let doc = b"<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<xweb-dw-model><bogus/></xweb-dw-model>";
        match parse_model(doc) {
            Err(CodecError::Malformed { offset, message }) => {
                assert!(offset > 0);
                assert!(message.contains("bogus"));
            }
            other => panic!("expected Malformed, got {other:?}"),
        }
    }

    #[test]
    fn model_requires_a_fact() {
        let doc = b"<xweb-dw-model></xweb-dw-model>";
        assert!(matches!(parse_model(doc), Err(CodecError::Malformed { .. })));
    }

    #[test]
    fn invalid_model_content_is_flagged() {
        let doc = b"<xweb-dw-model>\
            <fact id=\"F\" path=\"f.xml\"><measure name=\"M\"/></fact>\
            <dimension id=\"D\" path=\"d.xml\">\
              <level id=\"A\" rollup=\"Nope\" drilldown=\"\"/>\
            </dimension>\
            </xweb-dw-model>";
        assert!(matches!(parse_model(doc), Err(CodecError::InvalidModel(_))));
    }

    #[test]
    fn dimension_round_trips_both_parent_encodings() {
        let d = DimensionDef {
            id: "D".into(),
            path: "d.xml".into(),
            levels: vec![LevelDef::new("Lo", &["Hi"], &[]), LevelDef::new("Hi", &[], &["Lo"])],
        };
        let data = vec![
            LevelData {
                level: "Lo".into(),
                instances: vec![
                    InstanceData {
                        id: "a".into(),
                        parents: vec!["x".into()],
                        attrs: vec![("v".into(), "1".into()), ("w".into(), "t & t".into())],
                    },
                    InstanceData {
                        id: "b".into(),
                        parents: vec!["x".into(), "y".into()],
                        attrs: vec![("v".into(), "2".into())],
                    },
                ],
            },
            LevelData {
                level: "Hi".into(),
                instances: vec![
                    InstanceData { id: "x".into(), ..Default::default() },
                    InstanceData { id: "y".into(), ..Default::default() },
                ],
            },
        ];
        let bytes = emit_dimension(&d, &data).unwrap();
        let parsed = parse_dimension(&bytes).unwrap();
        assert_eq!(parsed.id, "D");
        assert_eq!(parsed.levels, data);
    }

    #[test]
    fn attribute_encoded_members_are_accepted() {
        let doc = b"<dimension id=\"D\">\
            <Level id=\"L\">\
              <instance id=\"1\" parent=\"p\" n_name=\"FRANCE\"/>\
              <instance id=\"2\"><n_name>GERMANY</n_name><parent ref=\"p\"/></instance>\
            </Level>\
            </dimension>";
        let parsed = parse_dimension(doc).unwrap();
        let l = &parsed.levels[0];
        assert_eq!(l.instances[0].attrs, vec![("n_name".into(), "FRANCE".into())]);
        assert_eq!(l.instances[0].parents, vec!["p".to_string()]);
        assert_eq!(l.instances[1].attrs, vec![("n_name".into(), "GERMANY".into())]);
        assert_eq!(l.instances[1].parents, vec!["p".to_string()]);
    }

    #[test]
    fn lowercase_level_elements_are_accepted() {
        let doc = b"<dimension id=\"D\"><level id=\"L\"><instance id=\"1\"/></level></dimension>";
        let parsed = parse_dimension(doc).unwrap();
        assert_eq!(parsed.levels[0].level, "L");
        assert_eq!(parsed.levels[0].instances.len(), 1);
    }

    #[test]
    fn facts_tolerate_shuffle_missing_and_unknown() {
        let doc = b"<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<facts id=\"Sale\">\
            <fact><f_quantity>5</f_quantity><c_custkey>2</c_custkey></fact>\
            <fact><p_partkey>1</p_partkey><comment>hi</comment></fact>\
            <fact><f_totalamount>12.34</f_totalamount><f_quantity>oops</f_quantity></fact>\
            <fact/>\
            </facts>";
        let mut warnings = Vec::new();
        let facts = parse_facts(doc, &mut warnings).unwrap();
        assert_eq!(facts.len(), 4);
        assert_eq!(facts[0].quantity, Some(5));
        assert_eq!(facts[0].custkey, Some(2));
        assert_eq!(facts[0].partkey, None);
        assert_eq!(facts[1].partkey, Some(1));
        assert_eq!(facts[2].total_cents, Some(1234));
        assert_eq!(facts[2].quantity, None);
        assert_eq!(facts[3].present_count(), 0);
        assert_eq!(
            warnings,
            vec![
                ParseWarning::UnknownFactChild { fact_index: 1, name: "comment".into() },
                ParseWarning::BadSlotValue {
                    fact_index: 2,
                    name: "f_quantity".into(),
                    text: "oops".into()
                },
            ]
        );
    }

    #[test]
    fn facts_round_trip_modulo_slot_order() {
        let mut a = Fact::empty();
        a.set(Slot::CustKey, Some(1));
        a.set(Slot::PartKey, Some(2));
        a.set(Slot::Quantity, Some(3));
        a.set(Slot::TotalAmount, Some(4599));
        a.slot_order = [
            Slot::Quantity,
            Slot::CustKey,
            Slot::TotalAmount,
            Slot::PartKey,
            Slot::SuppKey,
            Slot::DateKey,
        ];
        let bytes = crate::codec::emit_facts(&[a.clone()], "Sale");
        let mut warnings = Vec::new();
        let parsed = parse_facts(&bytes, &mut warnings).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(parsed.len(), 1);
        assert!(parsed[0].logical_eq(&a));
    }

    #[test]
    fn escaped_values_round_trip() {
        let doc = b"<dimension id=\"D\"><Level id=\"L\">\
            <instance id=\"1\"><v>a &amp; b &lt; c</v></instance>\
            </Level></dimension>";
        let parsed = parse_dimension(doc).unwrap();
        assert_eq!(parsed.levels[0].instances[0].attrs[0].1, "a & b < c");
    }
}
