//! Wire protocol: each frame is a 4-byte big-endian payload length, a 1-byte
//! kind tag, then a compact JSON payload of exactly that length.

use std::io::{self, Read, Write};

use serde_json::{json, Map, Value as Json};
use uuid::Uuid;

use crate::error::{Error, Result};
use crate::mrdi::MrdiDocument;

/// Upper bound on a single payload; anything larger is treated as corruption.
pub const MAX_FRAME: usize = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MessageKind {
    LoadContext = 1,
    Call = 2,
    Result = 3,
    Failure = 4,
    Shutdown = 5,
}

impl MessageKind {
    pub fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            1 => MessageKind::LoadContext,
            2 => MessageKind::Call,
            3 => MessageKind::Result,
            4 => MessageKind::Failure,
            5 => MessageKind::Shutdown,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Message {
    /// A context's ref document, sent after everything it depends on.
    LoadContext { uuid: Uuid, doc: MrdiDocument },
    /// `args` is an interprocess document of a tuple.
    Call { id: u64, function: String, args: MrdiDocument },
    /// `refs` carries, in dependency order, the contexts the result mentions
    /// that the receiver has not seen. A LoadContext is acknowledged with id 0.
    Result { id: u64, result: MrdiDocument, refs: Vec<(Uuid, MrdiDocument)> },
    Failure { id: u64, error: String },
    Shutdown,
}

/// Id used for acknowledgments of LoadContext; call ids start at 1.
pub const ACK_ID: u64 = 0;

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Message::LoadContext { .. } => MessageKind::LoadContext,
            Message::Call { .. } => MessageKind::Call,
            Message::Result { .. } => MessageKind::Result,
            Message::Failure { .. } => MessageKind::Failure,
            Message::Shutdown => MessageKind::Shutdown,
        }
    }

    /// The acknowledgment a worker sends for a LoadContext.
    pub fn ack() -> Message {
        Message::Result {
            id: ACK_ID,
            result: MrdiDocument {
                ns: None,
                type_tree: crate::mrdi::TypeNode::new("Tuple"),
                refs: None,
                data: crate::mrdi::DataNode::Seq(vec![]),
            },
            refs: vec![],
        }
    }

    fn payload(&self) -> Json {
        match self {
            Message::LoadContext { uuid, doc } => json!({"uuid": uuid.to_string(), "ref": doc.to_json()}),
            Message::Call { id, function, args } => {
                json!({"id": id.to_string(), "fn": function, "args": args.to_json()})
            }
            Message::Result { id, result, refs } => {
                let table: Map<String, Json> = refs.iter().map(|(u, d)| (u.to_string(), d.to_json())).collect();
                json!({"id": id.to_string(), "result": result.to_json(), "refs": table})
            }
            Message::Failure { id, error } => json!({"id": id.to_string(), "error": error}),
            Message::Shutdown => json!({}),
        }
    }

    fn from_payload(kind: MessageKind, json: &Json) -> Result<Message> {
        let obj = json
            .as_object()
            .ok_or_else(|| Error::Transport("payload is not a JSON object".into()))?;
        let field = |k: &str| obj.get(k).ok_or_else(|| Error::Transport(format!("payload lacks `{k}`")));
        let string = |k: &str| {
            field(k)?
                .as_str()
                .ok_or_else(|| Error::Transport(format!("`{k}` is not a string")))
        };
        let id = || {
            string("id")?
                .parse::<u64>()
                .map_err(|_| Error::Transport("bad call id".into()))
        };
        let uuid = |s: &str| Uuid::parse_str(s).map_err(|_| Error::Transport(format!("bad UUID `{s}`")));
        let doc = |j: &Json| MrdiDocument::from_json(j).map_err(|e| Error::Transport(e.to_string()));
        Ok(match kind {
            MessageKind::LoadContext => Message::LoadContext {
                uuid: uuid(string("uuid")?)?,
                doc: doc(field("ref")?)?,
            },
            MessageKind::Call => Message::Call {
                id: id()?,
                function: string("fn")?.to_string(),
                args: doc(field("args")?)?,
            },
            MessageKind::Result => {
                let table = field("refs")?
                    .as_object()
                    .ok_or_else(|| Error::Transport("`refs` is not an object".into()))?;
                Message::Result {
                    id: id()?,
                    result: doc(field("result")?)?,
                    refs: table
                        .iter()
                        .map(|(k, v)| Ok((uuid(k)?, doc(v)?)))
                        .collect::<Result<Vec<_>>>()?,
                }
            }
            MessageKind::Failure => Message::Failure {
                id: id()?,
                error: string("error")?.to_string(),
            },
            MessageKind::Shutdown => Message::Shutdown,
        })
    }
}

pub fn encode_frame(msg: &Message) -> Vec<u8> {
    let body = serde_json::to_vec(&msg.payload()).expect("JSON values always serialize");
    let mut out = Vec::with_capacity(body.len() + 5);
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.push(msg.kind() as u8);
    out.extend_from_slice(&body);
    out
}

pub fn write_message(w: &mut impl Write, msg: &Message) -> Result<()> {
    w.write_all(&encode_frame(msg))
        .and_then(|_| w.flush())
        .map_err(|e| Error::Transport(format!("write failed: {e}")))
}

/// Reads one frame. Returns `None` on end of stream at a frame boundary.
pub fn read_message(r: &mut impl Read) -> Result<Option<Message>> {
    let mut header = [0u8; 5];
    let mut filled = 0;
    while filled < header.len() {
        match r.read(&mut header[filled..]) {
            Ok(0) if filled == 0 => return Ok(None),
            Ok(0) => return Err(Error::Transport("stream ended inside a frame header".into())),
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(Error::Transport(format!("read failed: {e}"))),
        }
    }
    let len = u32::from_be_bytes([header[0], header[1], header[2], header[3]]) as usize;
    if len > MAX_FRAME {
        return Err(Error::Transport(format!("frame of {len} bytes exceeds limit")));
    }
    let kind = MessageKind::from_tag(header[4])
        .ok_or_else(|| Error::Transport(format!("unknown message kind {}", header[4])))?;
    let mut body = vec![0u8; len];
    r.read_exact(&mut body)
        .map_err(|e| Error::Transport(format!("truncated frame: {e}")))?;
    let json: Json =
        serde_json::from_slice(&body).map_err(|e| Error::Transport(format!("malformed payload: {e}")))?;
    Message::from_payload(kind, &json).map(Some)
}

/// Parses a complete byte stream of frames.
pub fn decode_frames(mut bytes: &[u8]) -> Result<Vec<Message>> {
    let mut out = Vec::new();
    while let Some(m) = read_message(&mut bytes)? {
        out.push(m);
    }
    Ok(out)
}
