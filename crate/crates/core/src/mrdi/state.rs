use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Mutex;

use uuid::Uuid;

use super::document::{DataNode, MrdiDocument, Param, TypeNode};
use crate::algebra::{ContextHandle, RingDescriptor};
use crate::error::{Error, Result};

/// Serializer mode: self-contained long-term files or stripped interprocess
/// messages whose contexts are preloaded on the receiving side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    LongTerm,
    Ipc,
}

#[derive(Default)]
struct Bindings {
    uuid_of: HashMap<u64, Uuid>,
    context_of: HashMap<Uuid, ContextHandle>,
}

/// Association between contexts and UUIDs shared across documents (and, on
/// each side of a pipe, across messages).
///
/// A context keeps the first UUID it was bound to. Further UUIDs for the same
/// context, e.g. minted independently by two worker processes, resolve to it
/// as aliases.
#[derive(Default)]
pub struct GlobalSerializerState {
    inner: Mutex<Bindings>,
}

impl GlobalSerializerState {
    pub fn new() -> Self {
        Self::default()
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Bindings> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Returns the UUID of `ctx`, minting a fresh version-4 UUID for it (and
    /// for any base ring lacking one) on first use.
    pub fn register_context(&self, ctx: &ContextHandle) -> Uuid {
        let mut b = self.lock();
        let mut chain = ctx.dependencies();
        chain.reverse();
        chain.push(ctx.clone());
        let mut last = Uuid::nil();
        for c in chain {
            last = match b.uuid_of.get(&c.id()) {
                Some(u) => *u,
                None => {
                    let u = Uuid::new_v4();
                    b.uuid_of.insert(c.id(), u);
                    b.context_of.insert(u, c);
                    u
                }
            };
        }
        last
    }

    /// Binds `uuid` to `ctx`. Fails if the UUID already names another context.
    pub fn bind(&self, uuid: Uuid, ctx: &ContextHandle) -> Result<()> {
        let mut b = self.lock();
        if let Some(existing) = b.context_of.get(&uuid) {
            if existing != ctx {
                return Err(Error::Context(format!(
                    "UUID {uuid} is already bound to {existing}, cannot rebind to {ctx}"
                )));
            }
            return Ok(());
        }
        b.context_of.insert(uuid, ctx.clone());
        b.uuid_of.entry(ctx.id()).or_insert(uuid);
        Ok(())
    }

    pub fn uuid_of(&self, ctx: &ContextHandle) -> Option<Uuid> {
        self.lock().uuid_of.get(&ctx.id()).copied()
    }

    pub fn context(&self, uuid: Uuid) -> Option<ContextHandle> {
        self.lock().context_of.get(&uuid).cloned()
    }

    /// The standalone document describing a bound context. Its base ring is
    /// referenced by UUID, so the base must be bound too.
    pub fn ref_document(&self, uuid: Uuid) -> Result<MrdiDocument> {
        let ctx = self.context(uuid).ok_or(Error::DanglingReference(uuid))?;
        context_document(&ctx, &mut |base| {
            self.uuid_of(base)
                .ok_or_else(|| Error::ContextNotPreloaded(base.to_string()))
        })
    }

    /// Context UUIDs reachable from `tree`, each after the contexts it
    /// depends on.
    pub fn post_order(&self, tree: &TypeNode) -> Result<Vec<Uuid>> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for u in tree.uuids() {
            self.post_order_visit(u, &mut seen, &mut out)?;
        }
        Ok(out)
    }

    fn post_order_visit(&self, u: Uuid, seen: &mut HashSet<Uuid>, out: &mut Vec<Uuid>) -> Result<()> {
        if !seen.insert(u) {
            return Ok(());
        }
        let doc = self.ref_document(u)?;
        for dep in doc.type_tree.uuids() {
            self.post_order_visit(dep, seen, out)?;
        }
        out.push(u);
        Ok(())
    }
}

/// Parameter naming a ring inside a type tree: integers and rationals are
/// inline type nodes, everything else is a UUID.
pub(crate) fn ring_param(
    ctx: &ContextHandle,
    uuid_for: &mut dyn FnMut(&ContextHandle) -> Result<Uuid>,
) -> Result<Param> {
    Ok(match ctx.descriptor() {
        RingDescriptor::Integers => Param::Type(Box::new(TypeNode::new("ZZRing"))),
        RingDescriptor::Rationals => Param::Type(Box::new(TypeNode::new("QQField"))),
        _ => Param::Ref(uuid_for(ctx)?),
    })
}

pub(crate) fn needs_ref(ctx: &ContextHandle) -> bool {
    !matches!(ctx.descriptor(), RingDescriptor::Integers | RingDescriptor::Rationals)
}

/// Builds the `_refs` entry for a context.
pub(crate) fn context_document(
    ctx: &ContextHandle,
    uuid_for: &mut dyn FnMut(&ContextHandle) -> Result<Uuid>,
) -> Result<MrdiDocument> {
    let (type_tree, data) = match ctx.descriptor() {
        RingDescriptor::Integers => (TypeNode::new("ZZRing"), DataNode::Map(vec![])),
        RingDescriptor::Rationals => (TypeNode::new("QQField"), DataNode::Map(vec![])),
        RingDescriptor::PrimeField(p) => (
            TypeNode::new("FpField"),
            DataNode::Map(vec![("characteristic".into(), DataNode::text(p.to_string()))]),
        ),
        RingDescriptor::Univariate { base, symbol } => (
            TypeNode::with_params(
                "PolyRing",
                Param::Map(vec![("base_ring".into(), ring_param(base, uuid_for)?)]),
            ),
            DataNode::Map(vec![("symbol".into(), DataNode::text(symbol.clone()))]),
        ),
        RingDescriptor::Multivariate { base, symbols } => (
            TypeNode::with_params(
                "MPolyRing",
                Param::Map(vec![("base_ring".into(), ring_param(base, uuid_for)?)]),
            ),
            DataNode::Map(vec![(
                "symbols".into(),
                DataNode::Seq(symbols.iter().map(|s| DataNode::text(s.clone())).collect()),
            )]),
        ),
    };
    Ok(MrdiDocument {
        ns: None,
        type_tree,
        refs: None,
        data,
    })
}

/// Resolves a ring parameter to a context.
pub(crate) fn resolve_ring_param(
    param: &Param,
    path: &str,
    resolve: &mut dyn FnMut(Uuid) -> Result<ContextHandle>,
) -> Result<ContextHandle> {
    match param {
        Param::Ref(u) => resolve(*u),
        Param::Type(t) if t.params.is_none() && t.name == "ZZRing" => Ok(ContextHandle::integers()),
        Param::Type(t) if t.params.is_none() && t.name == "QQField" => Ok(ContextHandle::rationals()),
        Param::Type(t) => Err(Error::UnsupportedType(format!("{} as a ring parameter at {path}", t.name))),
        Param::Map(_) => Err(Error::decode(path, "expected a ring parameter")),
    }
}

/// Reconstructs (and interns) the context a ref document describes.
pub fn context_from_document(
    doc: &MrdiDocument,
    path: &str,
    resolve: &mut dyn FnMut(Uuid) -> Result<ContextHandle>,
) -> Result<ContextHandle> {
    let t = &doc.type_tree;
    let base = |resolve: &mut dyn FnMut(Uuid) -> Result<ContextHandle>| {
        let p = t
            .params
            .as_ref()
            .and_then(|p| p.get("base_ring"))
            .ok_or_else(|| Error::decode(&format!("{path}/_type/params"), "missing base_ring"))?;
        resolve_ring_param(p, &format!("{path}/_type/params/base_ring"), resolve)
    };
    let field = |key: &str| {
        doc.data
            .get(key)
            .ok_or_else(|| Error::decode(&format!("{path}/data"), format!("missing `{key}`")))
    };
    let text = |node: &DataNode, at: String| match node {
        DataNode::Text(s) => Ok(s.clone()),
        _ => Err(Error::decode(&at, "expected text")),
    };
    match t.name.as_str() {
        "ZZRing" => Ok(ContextHandle::integers()),
        "QQField" => Ok(ContextHandle::rationals()),
        "FpField" => {
            let s = text(field("characteristic")?, format!("{path}/data/characteristic"))?;
            let p: u64 = s
                .parse()
                .map_err(|_| Error::decode(&format!("{path}/data/characteristic"), format!("bad characteristic `{s}`")))?;
            ContextHandle::prime_field(p)
        }
        "PolyRing" => {
            let b = base(resolve)?;
            let sym = text(field("symbol")?, format!("{path}/data/symbol"))?;
            ContextHandle::univariate(&b, &sym)
        }
        "MPolyRing" => {
            let b = base(resolve)?;
            let syms = match field("symbols")? {
                DataNode::Seq(items) => items
                    .iter()
                    .enumerate()
                    .map(|(i, n)| text(n, format!("{path}/data/symbols/{i}")))
                    .collect::<Result<Vec<_>>>()?,
                _ => return Err(Error::decode(&format!("{path}/data/symbols"), "expected a list")),
            };
            ContextHandle::multivariate(&b, &syms)
        }
        other => Err(Error::UnsupportedType(other.to_string())),
    }
}

/// Per-save bookkeeping.
pub struct SerializerState<'g> {
    mode: Mode,
    global: &'g GlobalSerializerState,
    pending: BTreeMap<Uuid, MrdiDocument>,
}

impl<'g> SerializerState<'g> {
    pub fn new(mode: Mode, global: &'g GlobalSerializerState) -> Self {
        SerializerState {
            mode,
            global,
            pending: BTreeMap::new(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn global(&self) -> &'g GlobalSerializerState {
        self.global
    }

    pub(crate) fn take_pending(&mut self) -> BTreeMap<Uuid, MrdiDocument> {
        std::mem::take(&mut self.pending)
    }

    /// UUID for `ctx`, registering it (and its bases, first) in long-term
    /// mode. Interprocess mode requires the context to be bound already.
    pub fn context_uuid(&mut self, ctx: &ContextHandle) -> Result<Uuid> {
        match self.mode {
            Mode::Ipc => self
                .global
                .uuid_of(ctx)
                .ok_or_else(|| Error::ContextNotPreloaded(ctx.to_string())),
            Mode::LongTerm => {
                let uuid = self.global.register_context(ctx);
                if !self.pending.contains_key(&uuid) {
                    if let Some(base) = ctx.base() {
                        if needs_ref(base) {
                            self.context_uuid(base)?;
                        }
                    }
                    let global = self.global;
                    let doc = context_document(ctx, &mut |b| Ok(global.register_context(b)))?;
                    self.pending.insert(uuid, doc);
                }
                Ok(uuid)
            }
        }
    }

    pub(crate) fn ring_param(&mut self, ctx: &ContextHandle) -> Result<Param> {
        if needs_ref(ctx) {
            Ok(Param::Ref(self.context_uuid(ctx)?))
        } else {
            ring_param(ctx, &mut |_| unreachable!())
        }
    }
}

/// Per-load bookkeeping.
pub struct DeserializerState<'a> {
    mode: Mode,
    global: &'a GlobalSerializerState,
    refs: Option<&'a BTreeMap<Uuid, MrdiDocument>>,
    resolving: HashSet<Uuid>,
}

impl<'a> DeserializerState<'a> {
    pub fn new(mode: Mode, global: &'a GlobalSerializerState) -> Self {
        DeserializerState {
            mode,
            global,
            refs: None,
            resolving: HashSet::new(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub(crate) fn attach(&mut self, doc: &'a MrdiDocument) {
        self.refs = doc.refs.as_ref();
    }

    /// Context for `uuid`: an existing binding wins; otherwise long-term
    /// documents build it from `_refs` (dependencies first) and bind it.
    pub fn resolve(&mut self, uuid: Uuid) -> Result<ContextHandle> {
        if let Some(ctx) = self.global.context(uuid) {
            return Ok(ctx);
        }
        if self.mode == Mode::Ipc {
            return Err(Error::ContextNotPreloaded(uuid.to_string()));
        }
        let refs = self.refs;
        let doc = refs
            .and_then(|r| r.get(&uuid))
            .ok_or(Error::DanglingReference(uuid))?;
        if !self.resolving.insert(uuid) {
            return Err(Error::CyclicReference(uuid));
        }
        let ctx = context_from_document(doc, &format!("/_refs/{uuid}"), &mut |u| self.resolve(u))?;
        self.resolving.remove(&uuid);
        self.global.bind(uuid, &ctx)?;
        Ok(ctx)
    }
}
