//! Interoperability simulation: version negotiation, emulation of early
//! clients, a caching proxy model, and scripted multi-party exchanges.

mod cache;
mod emulate;
mod exchange;
mod negotiate;
mod script;
mod trace;

use std::fmt;

pub use cache::{cache_decision, CacheDecision, ProxyCache};
pub use emulate::{emulate_client, ClientFlavor, Emulated, SetCookieKind};
pub use exchange::{run_exchange, ExchangeError, SimEnv};
pub use negotiate::{negotiate_server_headers, HeaderPlan, ServerCapability};
pub use script::{ClientDecl, ExchangeScript, Link, RequestStep, ResponseStep, Route, ScriptError, Step};
pub use exchange::{MAX_LINK_DEPTH, SIM_EPOCH};
pub use trace::{format_trace, EventKind, Rejection, TraceEvent};

/// A single HTTP header line.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Header {
    pub name: String,
    pub value: String,
}

impl Header {
    pub fn new(name: impl Into<String>, value: impl Into<String>) -> Header {
        Header {
            name: name.into(),
            value: value.into(),
        }
    }

    pub fn is(&self, name: &str) -> bool {
        self.name.eq_ignore_ascii_case(name)
    }
}

impl fmt::Display for Header {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, self.value)
    }
}

/// Values of every header called `name`, in order.
pub fn header_values<'a>(headers: &'a [Header], name: &'a str) -> impl Iterator<Item = &'a str> + 'a {
    headers.iter().filter(move |h| h.is(name)).map(|h| h.value.as_str())
}
