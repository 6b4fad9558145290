use std::fmt;

use crate::header::{parse_set_cookie, Mode};

/// Client implementations whose handling of new-style cookies differed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClientFlavor {
    /// Takes the first attribute-value pair as the cookie.
    NavigatorV3,
    /// Takes the last attribute-value pair it does not recognize.
    MsieV3,
    /// Understands Set-Cookie2 and Cookie2.
    Rfc2965,
}

impl ClientFlavor {
    pub fn as_str(self) -> &'static str {
        match self {
            ClientFlavor::NavigatorV3 => "navigator3",
            ClientFlavor::MsieV3 => "msie3",
            ClientFlavor::Rfc2965 => "rfc2965",
        }
    }

    pub fn parse(text: &str) -> Option<ClientFlavor> {
        match text.to_ascii_lowercase().as_str() {
            "navigator3" | "navigatorv3" => Some(ClientFlavor::NavigatorV3),
            "msie3" | "msiev3" => Some(ClientFlavor::MsieV3),
            "rfc2965" => Some(ClientFlavor::Rfc2965),
            _ => None,
        }
    }

    pub fn understands_v1(self) -> bool {
        self == ClientFlavor::Rfc2965
    }
}

impl fmt::Display for ClientFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetCookieKind {
    SetCookie,
    SetCookie2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Emulated {
    Stored { name: String, value: String },
    Ignored { diagnostic: String },
}

const V0_ATTRIBUTES: [&str; 4] = ["domain", "path", "expires", "secure"];

fn pairs(text: &str) -> impl Iterator<Item = (&str, &str)> {
    text.split(';')
        .filter_map(|part| part.split_once('='))
        .map(|(n, v)| (n.trim(), v.trim()))
}

/// The name and value a client would store for one Set-Cookie header.
pub fn emulate_client(flavor: ClientFlavor, kind: SetCookieKind, header_value: &str) -> Emulated {
    if kind == SetCookieKind::SetCookie2 && !flavor.understands_v1() {
        return Emulated::Ignored {
            diagnostic: format!("{flavor} does not know Set-Cookie2"),
        };
    }
    let found = match flavor {
        ClientFlavor::NavigatorV3 => pairs(header_value).next().filter(|(n, _)| !n.is_empty()),
        ClientFlavor::MsieV3 => pairs(header_value)
            .filter(|(n, _)| !n.is_empty() && !V0_ATTRIBUTES.iter().any(|a| n.eq_ignore_ascii_case(a)))
            .last(),
        ClientFlavor::Rfc2965 => {
            let mode = match kind {
                SetCookieKind::SetCookie => Mode::V0,
                SetCookieKind::SetCookie2 => Mode::V1,
            };
            return match parse_set_cookie(header_value, mode) {
                Ok(specs) => {
                    let first = specs.into_iter().next().expect("parse yields at least one cookie");
                    Emulated::Stored {
                        name: first.name,
                        value: first.value,
                    }
                }
                Err(e) => Emulated::Ignored {
                    diagnostic: e.to_string(),
                },
            };
        }
    };
    match found {
        Some((name, value)) => Emulated::Stored {
            name: name.to_string(),
            value: value.to_string(),
        },
        None => Emulated::Ignored {
            diagnostic: "no attribute-value pair".to_string(),
        },
    }
}
