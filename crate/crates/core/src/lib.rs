//! HTTP state management: cookie header syntax, domain matching, a cookie
//! jar, privacy policy, and a simulator for multi-party cookie exchanges.
//!
//! Both the original Netscape mechanism (`Set-Cookie`/`Cookie`, here
//! "version 0") and the `Set-Cookie2`/`Cookie2` mechanism ("version 1") are
//! supported.

pub mod date;
pub mod header;
pub mod jar;
pub mod matching;
pub mod policy;
pub mod sim;

pub use date::{format_http_date, parse_http_date, UnixTime};
pub use header::{
    parse_cookie_request, parse_set_cookie, serialize_cookie_header, serialize_set_cookie, CookieSpec, Mode,
    PortSpec,
};
pub use jar::{Clock, FixedClock, Jar, ManualClock, StoreResult, StoredCookie};
pub use matching::{DomainPattern, HostName};
pub use policy::{PolicyConfig, PrivacyMode, RequestContext};
