//! Protocol messages and their line-oriented wire encoding.

use std::sync::Arc;

use super::ProtocolError;
use crate::attributes::{AttributeSchema, AttributeVector};

/// Messages exchanged between a photographer and nearby strangers.
#[derive(Debug, Clone, PartialEq)]
pub enum ProtoMessage {
    /// A photo with faces was captured; strangers may request blurring.
    CaptureNotice { session: String, photographer: String },
    /// A stranger asks to be blurred, attaching their attribute profile.
    BlurRequest {
        session: String,
        requester: String,
        attributes: AttributeVector,
    },
    /// The collection window closed.
    SessionClosed { session: String },
}

/// Message families, for conservation accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    Notice,
    Request,
    Close,
}

impl MessageKind {
    pub const ALL: [MessageKind; 3] = [Self::Notice, Self::Request, Self::Close];

    pub fn label(self) -> &'static str {
        match self {
            Self::Notice => "notice",
            Self::Request => "request",
            Self::Close => "close",
        }
    }
}

impl ProtoMessage {
    pub fn kind(&self) -> MessageKind {
        match self {
            Self::CaptureNotice { .. } => MessageKind::Notice,
            Self::BlurRequest { .. } => MessageKind::Request,
            Self::SessionClosed { .. } => MessageKind::Close,
        }
    }

    pub fn session(&self) -> &str {
        match self {
            Self::CaptureNotice { session, .. }
            | Self::BlurRequest { session, .. }
            | Self::SessionClosed { session } => session,
        }
    }

    /// Line encoding: `NOTICE <session> <photographer>`,
    /// `REQ <session> <agent> <attr-string>`, `CLOSE <session>`.
    /// Identifiers must be whitespace-free.
    pub fn encode(&self) -> String {
        match self {
            Self::CaptureNotice {
                session,
                photographer,
            } => format!("NOTICE {session} {photographer}"),
            Self::BlurRequest {
                session,
                requester,
                attributes,
            } => format!("REQ {session} {requester} {}", attributes.encode()),
            Self::SessionClosed { session } => format!("CLOSE {session}"),
        }
    }

    /// Parses a wire line; `REQ` attribute strings decode against `schema`.
    pub fn decode(line: &str, schema: &Arc<AttributeSchema>) -> Result<Self, ProtocolError> {
        let bad = || ProtocolError::BadWireLine(line.to_string());
        let mut parts = line.split_whitespace();
        let verb = parts.next().ok_or_else(bad)?;
        let mut field = || parts.next().map(str::to_string).ok_or_else(bad);
        let msg = match verb {
            "NOTICE" => Self::CaptureNotice {
                session: field()?,
                photographer: field()?,
            },
            "REQ" => {
                let session = field()?;
                let requester = field()?;
                let attrs = field()?;
                Self::BlurRequest {
                    session,
                    requester,
                    attributes: AttributeVector::decode(&attrs, schema)?,
                }
            }
            "CLOSE" => Self::SessionClosed { session: field()? },
            _ => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(msg)
    }
}
