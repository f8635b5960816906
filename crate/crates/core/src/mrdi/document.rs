//! The four-subtree document model and its JSON text form.

use std::collections::BTreeMap;

use serde_json::{Map, Value as Json};
use uuid::Uuid;

use crate::error::{Error, Result};

pub const SYSTEM_NAME: &str = "mrdi-core";
pub const SYSTEM_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamespaceRecord {
    pub system: String,
    pub version: String,
}

impl NamespaceRecord {
    pub fn current() -> Self {
        NamespaceRecord {
            system: SYSTEM_NAME.into(),
            version: SYSTEM_VERSION.into(),
        }
    }

    pub fn major_version(&self) -> Option<u64> {
        self.version.split('.').next()?.parse().ok()
    }
}

/// A type tag with optional parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeNode {
    pub name: String,
    pub params: Option<Param>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Param {
    /// A context identified in `_refs` or in a global serializer state.
    Ref(Uuid),
    Type(Box<TypeNode>),
    Map(Vec<(String, Param)>),
}

impl TypeNode {
    pub fn new(name: &str) -> Self {
        TypeNode {
            name: name.into(),
            params: None,
        }
    }

    pub fn with_params(name: &str, params: Param) -> Self {
        TypeNode {
            name: name.into(),
            params: Some(params),
        }
    }

    pub fn with_ref(name: &str, uuid: Uuid) -> Self {
        Self::with_params(name, Param::Ref(uuid))
    }

    /// Every UUID mentioned in the tree, in document order (duplicates kept).
    pub fn uuids(&self) -> Vec<Uuid> {
        let mut out = Vec::new();
        self.collect_uuids(&mut out);
        out
    }

    fn collect_uuids(&self, out: &mut Vec<Uuid>) {
        if let Some(p) = &self.params {
            p.collect_uuids(out);
        }
    }

    pub(crate) fn walk<'a>(&'a self, path: &str, f: &mut dyn FnMut(&str, &'a TypeNode)) {
        f(path, self);
        if let Some(p) = &self.params {
            p.walk(&format!("{path}/params"), f);
        }
    }

    pub(crate) fn walk_refs(&self, path: &str, f: &mut dyn FnMut(&str, Uuid)) {
        if let Some(p) = &self.params {
            p.walk_refs(&format!("{path}/params"), f);
        }
    }
}

impl Param {
    pub fn get(&self, key: &str) -> Option<&Param> {
        match self {
            Param::Map(entries) => entries.iter().find(|(k, _)| k == key).map(|(_, v)| v),
            _ => None,
        }
    }

    fn collect_uuids(&self, out: &mut Vec<Uuid>) {
        match self {
            Param::Ref(u) => out.push(*u),
            Param::Type(t) => t.collect_uuids(out),
            Param::Map(entries) => entries.iter().for_each(|(_, p)| p.collect_uuids(out)),
        }
    }

    fn walk<'a>(&'a self, path: &str, f: &mut dyn FnMut(&str, &'a TypeNode)) {
        match self {
            Param::Ref(_) => {}
            Param::Type(t) => t.walk(path, f),
            Param::Map(entries) => {
                for (k, p) in entries {
                    p.walk(&format!("{path}/{}", escape_pointer(k)), f);
                }
            }
        }
    }

    fn walk_refs(&self, path: &str, f: &mut dyn FnMut(&str, Uuid)) {
        match self {
            Param::Ref(u) => f(path, *u),
            Param::Type(t) => t.walk_refs(path, f),
            Param::Map(entries) => {
                for (k, p) in entries {
                    p.walk_refs(&format!("{path}/{}", escape_pointer(k)), f);
                }
            }
        }
    }
}

/// Payload tree. Numbers are always decimal text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DataNode {
    Text(String),
    Seq(Vec<DataNode>),
    Map(Vec<(String, DataNode)>),
}

impl DataNode {
    pub fn text(s: impl Into<String>) -> Self {
        DataNode::Text(s.into())
    }

    pub fn get(&self, key: &str) -> Option<&DataNode> {
        match self {
            DataNode::Map(entries) => entries.iter().find(|(k, _)| k == key).map(|(_, v)| v),
            _ => None,
        }
    }
}

/// A serialized object: `_ns` and `_refs` are present for long-term storage
/// and absent for interprocess messages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MrdiDocument {
    pub ns: Option<NamespaceRecord>,
    pub type_tree: TypeNode,
    pub refs: Option<BTreeMap<Uuid, MrdiDocument>>,
    pub data: DataNode,
}

impl MrdiDocument {
    pub fn is_long_term(&self) -> bool {
        self.ns.is_some()
    }

    pub fn to_json(&self) -> Json {
        let mut obj = Map::new();
        if let Some(ns) = &self.ns {
            let mut n = Map::new();
            n.insert("system".into(), Json::String(ns.system.clone()));
            n.insert("version".into(), Json::String(ns.version.clone()));
            obj.insert("_ns".into(), Json::Object(n));
        }
        obj.insert("_type".into(), type_to_json(&self.type_tree));
        if let Some(refs) = &self.refs {
            let table = refs
                .iter()
                .map(|(u, d)| (u.to_string(), d.to_json()))
                .collect::<Map<_, _>>();
            obj.insert("_refs".into(), Json::Object(table));
        }
        obj.insert("data".into(), data_to_json(&self.data));
        Json::Object(obj)
    }

    pub fn from_json(json: &Json) -> Result<Self> {
        document_from_json(json, "")
    }
}

pub(crate) fn escape_pointer(s: &str) -> String {
    s.replace('~', "~0").replace('/', "~1")
}

fn type_to_json(t: &TypeNode) -> Json {
    let mut obj = Map::new();
    obj.insert("name".into(), Json::String(t.name.clone()));
    if let Some(p) = &t.params {
        obj.insert("params".into(), param_to_json(p));
    }
    Json::Object(obj)
}

fn param_to_json(p: &Param) -> Json {
    match p {
        Param::Ref(u) => Json::String(u.to_string()),
        Param::Type(t) => type_to_json(t),
        Param::Map(entries) => Json::Object(
            entries
                .iter()
                .map(|(k, v)| (k.clone(), param_to_json(v)))
                .collect(),
        ),
    }
}

fn data_to_json(d: &DataNode) -> Json {
    match d {
        DataNode::Text(s) => Json::String(s.clone()),
        DataNode::Seq(items) => Json::Array(items.iter().map(data_to_json).collect()),
        DataNode::Map(entries) => Json::Object(
            entries
                .iter()
                .map(|(k, v)| (k.clone(), data_to_json(v)))
                .collect(),
        ),
    }
}

fn schema(path: &str, msg: impl std::fmt::Display) -> Error {
    let path = if path.is_empty() { "/" } else { path };
    Error::Schema(format!("{path}: {msg}"))
}

fn document_from_json(json: &Json, path: &str) -> Result<MrdiDocument> {
    let obj = json
        .as_object()
        .ok_or_else(|| schema(path, "document must be a JSON object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "_ns" | "_type" | "_refs" | "data") {
            return Err(schema(path, format!("unknown top-level key `{key}`")));
        }
    }
    let ns = obj
        .get("_ns")
        .map(|v| ns_from_json(v, &format!("{path}/_ns")))
        .transpose()?;
    let type_tree = type_from_json(
        obj.get("_type").ok_or_else(|| schema(path, "missing `_type`"))?,
        &format!("{path}/_type"),
    )?;
    let refs = match obj.get("_refs") {
        None => None,
        Some(Json::Object(table)) => {
            let mut out = BTreeMap::new();
            for (k, v) in table {
                let p = format!("{path}/_refs/{}", escape_pointer(k));
                let uuid = Uuid::parse_str(k).map_err(|_| schema(&p, format!("invalid UUID `{k}`")))?;
                out.insert(uuid, document_from_json(v, &p)?);
            }
            Some(out)
        }
        Some(_) => return Err(schema(&format!("{path}/_refs"), "`_refs` must be an object")),
    };
    let data = data_from_json(
        obj.get("data").ok_or_else(|| schema(path, "missing `data`"))?,
        &format!("{path}/data"),
    )?;
    Ok(MrdiDocument {
        ns,
        type_tree,
        refs,
        data,
    })
}

fn ns_from_json(json: &Json, path: &str) -> Result<NamespaceRecord> {
    let obj = json
        .as_object()
        .ok_or_else(|| schema(path, "`_ns` must be an object"))?;
    let field = |k: &str| -> Result<String> {
        obj.get(k)
            .and_then(Json::as_str)
            .map(str::to_string)
            .ok_or_else(|| schema(path, format!("`{k}` must be a string")))
    };
    if let Some(k) = obj.keys().find(|k| *k != "system" && *k != "version") {
        return Err(schema(path, format!("unknown namespace key `{k}`")));
    }
    Ok(NamespaceRecord {
        system: field("system")?,
        version: field("version")?,
    })
}

fn type_from_json(json: &Json, path: &str) -> Result<TypeNode> {
    let obj = json
        .as_object()
        .ok_or_else(|| schema(path, "type node must be an object"))?;
    let name = obj
        .get("name")
        .and_then(Json::as_str)
        .ok_or_else(|| schema(path, "type node needs a string `name`"))?;
    if let Some(k) = obj.keys().find(|k| *k != "name" && *k != "params") {
        return Err(schema(path, format!("unknown type node key `{k}`")));
    }
    let params = obj
        .get("params")
        .map(|p| param_from_json(p, &format!("{path}/params")))
        .transpose()?;
    Ok(TypeNode {
        name: name.to_string(),
        params,
    })
}

fn param_from_json(json: &Json, path: &str) -> Result<Param> {
    match json {
        Json::String(s) => Uuid::parse_str(s)
            .map(Param::Ref)
            .map_err(|_| schema(path, format!("invalid UUID `{s}`"))),
        Json::Object(obj) if obj.contains_key("name") => Ok(Param::Type(Box::new(type_from_json(json, path)?))),
        Json::Object(obj) => {
            let mut entries = Vec::with_capacity(obj.len());
            for (k, v) in obj {
                entries.push((k.clone(), param_from_json(v, &format!("{path}/{}", escape_pointer(k)))?));
            }
            Ok(Param::Map(entries))
        }
        _ => Err(schema(path, "type parameter must be a UUID string or an object")),
    }
}

fn data_from_json(json: &Json, path: &str) -> Result<DataNode> {
    match json {
        Json::String(s) => Ok(DataNode::Text(s.clone())),
        Json::Array(items) => items
            .iter()
            .enumerate()
            .map(|(i, v)| data_from_json(v, &format!("{path}/{i}")))
            .collect::<Result<Vec<_>>>()
            .map(DataNode::Seq),
        Json::Object(obj) => {
            let mut entries = Vec::with_capacity(obj.len());
            for (k, v) in obj {
                entries.push((k.clone(), data_from_json(v, &format!("{path}/{}", escape_pointer(k)))?));
            }
            Ok(DataNode::Map(entries))
        }
        Json::Number(n) => Err(schema(path, format!("native number {n}; numbers must be text"))),
        Json::Bool(_) | Json::Null => Err(schema(path, "only strings, arrays and objects are allowed in data")),
    }
}

/// Text form: pretty-printed with a trailing newline for long-term documents,
/// compact for interprocess documents.
pub fn serialize_text(doc: &MrdiDocument) -> Vec<u8> {
    let json = doc.to_json();
    if doc.is_long_term() {
        let mut out = serde_json::to_vec_pretty(&json).expect("JSON values serialize");
        out.push(b'\n');
        out
    } else {
        serde_json::to_vec(&json).expect("JSON values serialize")
    }
}

/// Parses a document without checking its invariants.
pub fn parse_text_unchecked(bytes: &[u8]) -> Result<MrdiDocument> {
    let json: Json = serde_json::from_slice(bytes).map_err(|e| Error::Schema(format!("malformed JSON: {e}")))?;
    MrdiDocument::from_json(&json)
}

/// Parses and validates a document.
pub fn parse_text(bytes: &[u8]) -> Result<MrdiDocument> {
    let doc = parse_text_unchecked(bytes)?;
    super::validate::validate_document(&doc).map_err(Error::Invalid)?;
    Ok(doc)
}
