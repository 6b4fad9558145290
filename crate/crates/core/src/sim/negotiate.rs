use std::fmt;

use super::{header_values, Header};
use crate::header::{parse_cookie2, parse_cookie_request};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ServerCapability {
    /// Only understands `Set-Cookie`/`Cookie`.
    V0Only,
    /// Can also speak `Set-Cookie2`.
    V1Capable,
}

/// Which Set-Cookie headers a server emits in its response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeaderPlan {
    SendV0Only,
    SendV1Only,
    SendBoth,
}

impl HeaderPlan {
    pub fn allows_v0(self) -> bool {
        self != HeaderPlan::SendV1Only
    }

    pub fn allows_v1(self) -> bool {
        self != HeaderPlan::SendV0Only
    }
}

impl fmt::Display for HeaderPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeaderPlan::SendV0Only => "SendV0Only",
            HeaderPlan::SendV1Only => "SendV1Only",
            HeaderPlan::SendBoth => "SendBoth",
        })
    }
}

/// Picks the response header plan from what the request reveals about the
/// client: a `$Version=1` Cookie header or a `Cookie2: $Version=1`
/// advertisement means the client speaks v1; a bare v0 Cookie means it does
/// not; no cookie headers at all is a first contact, answered with both.
pub fn negotiate_server_headers(server: ServerCapability, request_headers: &[Header]) -> HeaderPlan {
    negotiate_with_rule(server, request_headers).0
}

pub(crate) fn negotiate_with_rule(server: ServerCapability, request_headers: &[Header]) -> (HeaderPlan, &'static str) {
    if server == ServerCapability::V0Only {
        return (HeaderPlan::SendV0Only, "negotiate.v0-server");
    }
    let cookies: Vec<&str> = header_values(request_headers, "Cookie").collect();
    let advertised = header_values(request_headers, "Cookie2").any(|v| parse_cookie2(v).is_ok_and(|ver| ver >= 1));

    if cookies.is_empty() {
        return if advertised {
            (HeaderPlan::SendV1Only, "negotiate.cookie2-advert")
        } else {
            (HeaderPlan::SendBoth, "negotiate.first-contact")
        };
    }
    match parse_cookie_request(&cookies) {
        Ok(parsed) if parsed.version >= 1 => (HeaderPlan::SendV1Only, "negotiate.v1-cookie"),
        _ if advertised => (HeaderPlan::SendV1Only, "negotiate.cookie2-advert"),
        Ok(_) => (HeaderPlan::SendV0Only, "negotiate.v0-cookie"),
        Err(_) => (HeaderPlan::SendBoth, "negotiate.unparseable-cookie"),
    }
}
