//! The mrdi document format: a JSON tree with a namespace record, a type
//! tree, a table of referenced ring contexts, and a data subtree.

pub mod codec;
pub mod document;
pub mod state;
pub mod validate;
pub mod value;

pub use codec::{encode_univariate, load, load_bytes, load_value, save, save_bytes, save_value};
pub use document::{
    parse_text, parse_text_unchecked, serialize_text, DataNode, MrdiDocument, NamespaceRecord, Param, TypeNode,
    SYSTEM_NAME, SYSTEM_VERSION,
};
pub use state::{context_from_document, DeserializerState, GlobalSerializerState, Mode, SerializerState};
pub use validate::{is_known_tag, validate_document, validate_with};
pub use value::Value;
