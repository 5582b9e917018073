//! Type-name helpers shared by translation and resolution.

/// True for value types, `mapping(..)`, and arrays of value types.
pub fn is_elementary(type_name: &str) -> bool {
    let t = type_name.trim();
    if t.starts_with("mapping") || t == "UNKNOWN" {
        return true;
    }
    let base = t.split('[').next().unwrap_or("").trim();
    let base = base.strip_suffix(" payable").unwrap_or(base);
    is_value_type(base)
}

fn is_value_type(t: &str) -> bool {
    let sized = |prefix: &str| {
        t.strip_prefix(prefix)
            .map(|rest| rest.is_empty() || rest.chars().all(|c| c.is_ascii_digit()))
            .unwrap_or(false)
    };
    matches!(t, "address" | "bool" | "string" | "byte" | "function")
        || sized("uint")
        || sized("int")
        || sized("bytes")
        || t.starts_with("fixed")
        || t.starts_with("ufixed")
}

/// The Type node's localName: `address payable` collapses to `address`.
pub fn type_local_name(type_name: &str) -> &str {
    match type_name {
        "address payable" => "address",
        t => t,
    }
}

/// Value type of a mapping or element type of an array.
pub fn element_type(type_name: &str) -> Option<String> {
    let t = type_name.trim();
    if let Some(inner) = t.strip_prefix("mapping").map(str::trim) {
        let inner = inner.strip_prefix('(')?.strip_suffix(')')?;
        let arrow = top_level_arrow(inner)?;
        return Some(inner[arrow + 2..].trim().to_string());
    }
    if t.ends_with(']') {
        let open = t.rfind('[')?;
        return Some(t[..open].trim().to_string());
    }
    None
}

fn top_level_arrow(s: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    let mut depth = 0i32;
    for i in 0..bytes.len() {
        match bytes[i] {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'=' if depth == 0 && bytes.get(i + 1) == Some(&b'>') => return Some(i),
            _ => {}
        }
    }
    None
}

/// Result type of a builtin member such as `msg.sender`.
pub fn builtin_type(code: &str) -> Option<&'static str> {
    Some(match code {
        "msg.sender" | "tx.origin" | "block.coinbase" => "address",
        "msg.value" | "msg.gas" | "tx.gasprice" | "block.timestamp" | "block.number"
        | "block.difficulty" | "block.gaslimit" | "block.prevrandao" | "block.basefee"
        | "block.chainid" | "now" => "uint256",
        "msg.data" => "bytes",
        "msg.sig" => "bytes4",
        _ => return None,
    })
}

/// Members that keep the type of their receiver (`a.call` is typed like `a`).
pub const LOW_LEVEL_MEMBERS: &[&str] = &[
    "call",
    "delegatecall",
    "callcode",
    "staticcall",
    "send",
    "transfer",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_types() {
        for t in ["uint", "uint256", "int8", "bytes32", "address payable", "bool[]", "mapping(address => uint)"] {
            assert!(is_elementary(t), "{t}");
        }
        for t in ["Token", "Data[]", "IERC20"] {
            assert!(!is_elementary(t), "{t}");
        }
    }

    #[test]
    fn element_types() {
        assert_eq!(element_type("mapping(address => uint)").as_deref(), Some("uint"));
        assert_eq!(
            element_type("mapping(address => mapping(uint => bool))").as_deref(),
            Some("mapping(uint => bool)")
        );
        assert_eq!(element_type("uint[][]").as_deref(), Some("uint[]"));
        assert_eq!(element_type("uint"), None);
    }
}
