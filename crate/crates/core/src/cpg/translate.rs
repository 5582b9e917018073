//! AST to graph translation. Produces syntax nodes and structural edges only;
//! the later passes add wrappers, modifier expansion, resolution, EOG and DFG.

use std::collections::HashMap;

use serde_json::{json, Value};

use super::graph::{CpgGraph, EdgeLabel, Label, NodeId};
use super::types::{is_elementary, type_local_name};
use super::CpgError;
use crate::parser::{collapse_ws, AstKind, AstNode, Shape, SnippetAst};

pub(crate) fn translate(ast: &SnippetAst) -> Result<CpgGraph, CpgError> {
    let mut t = Translator {
        g: CpgGraph::new(),
        ast,
        types: HashMap::new(),
        tu: 0,
    };
    t.tu = t.g.add_node(&[Label::TranslationUnit]);
    t.g.set_prop(t.tu, "code", "");
    t.g.set_prop(t.tu, "localName", ast.source_id.as_str());
    t.g.set_prop(t.tu, "name", ast.source_id.as_str());
    t.g.set_prop(t.tu, "isInferred", false);
    t.g.roots.push(t.tu);
    t.g.pragma_version = ast.pragma_version();
    for root in &ast.roots {
        if let Some(id) = t.top_level(root)? {
            t.g.add_edge(t.tu, id, EdgeLabel::Ast);
        }
    }
    Ok(t.g)
}

struct Translator<'a> {
    g: CpgGraph,
    ast: &'a SnippetAst,
    types: HashMap<String, NodeId>,
    tu: NodeId,
}

impl<'a> Translator<'a> {
    fn new_node(&mut self, labels: &[Label], src: &AstNode) -> NodeId {
        let id = self.g.add_node(labels);
        let code = collapse_ws(self.ast.node_text(src));
        self.g.set_prop(id, "code", code);
        self.g.set_prop(
            id,
            "location",
            json!({"line": src.span.line, "column": src.span.column}),
        );
        self.g.set_prop(id, "isInferred", false);
        id
    }

    fn names(&mut self, id: NodeId, local: &str, qualified: &str) {
        self.g.set_prop(id, "localName", local);
        self.g.set_prop(id, "name", qualified);
    }

    fn child(&mut self, parent: NodeId, child: NodeId, role: Option<EdgeLabel>) {
        self.g.add_edge(parent, child, EdgeLabel::Ast);
        if let Some(r) = role {
            self.g.add_edge(parent, child, r);
        }
    }

    /// The shared Type node for `type_name`.
    fn type_node(&mut self, type_name: &str) -> NodeId {
        if let Some(&id) = self.types.get(type_name) {
            return id;
        }
        let object = !is_elementary(type_name);
        let labels: &[Label] = if object {
            &[Label::Type, Label::ObjectType]
        } else {
            &[Label::Type]
        };
        let id = self.g.add_node(labels);
        self.g.set_prop(id, "code", type_name);
        self.g.set_prop(id, "localName", type_local_name(type_name));
        self.g.set_prop(id, "name", type_local_name(type_name));
        self.g.set_prop(id, "isInferred", false);
        self.g.add_edge(self.tu, id, EdgeLabel::Ast);
        self.types.insert(type_name.to_string(), id);
        id
    }

    fn typed(&mut self, id: NodeId, type_name: Option<&str>) {
        let tn = type_name.filter(|t| !t.is_empty()).unwrap_or("UNKNOWN");
        let t = self.type_node(tn);
        self.g.add_edge(id, t, EdgeLabel::Type);
    }

    fn top_level(&mut self, n: &AstNode) -> Result<Option<NodeId>, CpgError> {
        Ok(match n.kind {
            AstKind::Pragma | AstKind::Directive => None,
            AstKind::ContractDef
            | AstKind::StructDef
            | AstKind::EventDef
            | AstKind::EnumDef
            | AstKind::ErrorDef => Some(self.record(n, None)?),
            AstKind::FunctionDef | AstKind::ModifierDef | AstKind::ConstructorDef => {
                Some(self.function(n, None)?)
            }
            AstKind::FieldDecl => Some(self.field(n, None)?),
            AstKind::VarDecl if self.ast.shape != Shape::Statement => Some(self.field(n, None)?),
            _ => self.statement(n)?,
        })
    }

    fn record(&mut self, n: &AstNode, outer: Option<&str>) -> Result<NodeId, CpgError> {
        let id = self.new_node(&[Label::Record], n);
        let name = n.name().unwrap_or("").to_string();
        let qualified = qualify(outer, &name);
        self.names(id, &name, &qualified);
        let kind = match n.kind {
            AstKind::ContractDef => n
                .attrs
                .flavor
                .as_deref()
                .unwrap_or("contract")
                .trim_start_matches("abstract ")
                .to_string(),
            AstKind::StructDef => "struct".into(),
            AstKind::EventDef => "event".into(),
            AstKind::EnumDef => "enum".into(),
            _ => "error".into(),
        };
        self.g.set_prop(id, "kind", kind.as_str());
        self.g
            .set_prop(id, "superClasses", Value::from(n.attrs.bases.clone()));
        match n.kind {
            AstKind::ContractDef => {
                for m in &n.children {
                    let child = match m.kind {
                        AstKind::FieldDecl | AstKind::VarDecl => Some(self.field(m, Some(&qualified))?),
                        AstKind::FunctionDef | AstKind::ModifierDef | AstKind::ConstructorDef => {
                            Some(self.function_in(m, Some(&qualified), Some(&name))?)
                        }
                        AstKind::ContractDef
                        | AstKind::StructDef
                        | AstKind::EventDef
                        | AstKind::EnumDef
                        | AstKind::ErrorDef => Some(self.record(m, Some(&qualified))?),
                        AstKind::Directive | AstKind::Pragma => None,
                        other => return Err(CpgError::Unsupported(format!("{other:?} in contract"))),
                    };
                    if let Some(c) = child {
                        self.child(id, c, None);
                    }
                }
            }
            AstKind::StructDef => {
                for f in &n.children {
                    let c = self.field(f, Some(&qualified))?;
                    self.child(id, c, None);
                }
            }
            AstKind::EventDef | AstKind::ErrorDef => {
                for (i, p) in n.children.iter().enumerate() {
                    let c = self.param(p, i)?;
                    self.child(id, c, None);
                }
            }
            _ => {}
        }
        // FIELDS edges after all members exist
        let fields: Vec<NodeId> = self
            .g
            .ast_children(id)
            .into_iter()
            .filter(|&c| self.g.node(c).has(Label::Field))
            .collect();
        for f in fields {
            self.g.add_edge(id, f, EdgeLabel::Fields);
        }
        Ok(id)
    }

    fn field(&mut self, n: &AstNode, record: Option<&str>) -> Result<NodeId, CpgError> {
        let id = self.new_node(&[Label::Field, Label::Variable], n);
        let name = n.name().unwrap_or("");
        self.names(id, name, &qualify(record, name));
        if let Some(v) = &n.attrs.visibility {
            self.g.set_prop(id, "visibility", v.as_str());
        }
        self.typed(id, n.attrs.type_name.as_deref());
        if let Some(init) = n.children.first() {
            if let Some(e) = self.expression(init)? {
                self.child(id, e, Some(EdgeLabel::Initializer));
            }
        }
        Ok(id)
    }

    fn function(&mut self, n: &AstNode, record: Option<&str>) -> Result<NodeId, CpgError> {
        self.function_in(n, record, None)
    }

    fn function_in(
        &mut self,
        n: &AstNode,
        record: Option<&str>,
        contract_name: Option<&str>,
    ) -> Result<NodeId, CpgError> {
        let name = n.name().unwrap_or("");
        let old_style_ctor =
            n.kind == AstKind::FunctionDef && !name.is_empty() && Some(name) == contract_name;
        let labels: &[Label] = match n.kind {
            AstKind::ModifierDef => &[Label::Modifier],
            AstKind::ConstructorDef => &[Label::Function, Label::Constructor],
            _ if old_style_ctor => &[Label::Function, Label::Constructor],
            _ => &[Label::Function],
        };
        let id = self.new_node(labels, n);
        let local = match n.attrs.flavor.as_deref() {
            Some("fallback") => "",
            Some("receive") => "receive",
            _ => name,
        };
        self.names(id, local, &qualify(record, local));
        self.g
            .set_prop(id, "modifiers", Value::from(n.attrs.modifiers.clone()));
        if let Some(v) = &n.attrs.visibility {
            self.g.set_prop(id, "visibility", v.as_str());
        }
        let mut index = 0;
        for c in &n.children {
            match c.kind {
                AstKind::ParamDecl if c.attrs.is_return => {
                    let r = self.new_node(&[Label::Variable], c);
                    let pname = c.name().unwrap_or("");
                    self.names(r, pname, pname);
                    self.g.set_prop(r, "isReturn", true);
                    self.typed(r, c.attrs.type_name.as_deref());
                    self.child(id, r, None);
                }
                AstKind::ParamDecl => {
                    let p = self.param(c, index)?;
                    self.g.add_edge(id, p, EdgeLabel::Ast);
                    self.g.add_indexed_edge(id, p, EdgeLabel::Parameters, index as u32);
                    index += 1;
                }
                AstKind::Block => {
                    let b = self.block(c)?;
                    self.child(id, b, Some(EdgeLabel::Body));
                }
                other => return Err(CpgError::Unsupported(format!("{other:?} in function header"))),
            }
        }
        Ok(id)
    }

    fn param(&mut self, n: &AstNode, _index: usize) -> Result<NodeId, CpgError> {
        let id = self.new_node(&[Label::Param, Label::Variable], n);
        let name = n.name().unwrap_or("");
        self.names(id, name, name);
        self.typed(id, n.attrs.type_name.as_deref());
        Ok(id)
    }

    fn block(&mut self, n: &AstNode) -> Result<NodeId, CpgError> {
        let id = self.new_node(&[Label::Block], n);
        if n.attrs.unchecked {
            self.g.set_prop(id, "unchecked", true);
        }
        for s in &n.children {
            if let Some(c) = self.statement(s)? {
                self.child(id, c, None);
            }
        }
        Ok(id)
    }

    fn statement(&mut self, n: &AstNode) -> Result<Option<NodeId>, CpgError> {
        let id = match n.kind {
            AstKind::Block => self.block(n)?,
            AstKind::If => {
                let id = self.new_node(&[Label::If], n);
                self.slot(id, n.children.first(), EdgeLabel::Condition, false)?;
                self.slot(id, n.children.get(1), EdgeLabel::ThenStatement, true)?;
                self.slot(id, n.children.get(2), EdgeLabel::ElseStatement, true)?;
                id
            }
            AstKind::For => {
                let id = self.new_node(&[Label::For], n);
                self.slot(id, n.children.first(), EdgeLabel::InitializerStatement, true)?;
                self.slot(id, n.children.get(1), EdgeLabel::Condition, false)?;
                self.slot(id, n.children.get(2), EdgeLabel::IterationStatement, true)?;
                self.slot(id, n.children.get(3), EdgeLabel::Statement, true)?;
                id
            }
            AstKind::While => {
                let id = self.new_node(&[Label::While], n);
                self.slot(id, n.children.first(), EdgeLabel::Condition, false)?;
                self.slot(id, n.children.get(1), EdgeLabel::Statement, true)?;
                id
            }
            AstKind::DoWhile => {
                let id = self.new_node(&[Label::Do], n);
                self.slot(id, n.children.first(), EdgeLabel::Statement, true)?;
                self.slot(id, n.children.get(1), EdgeLabel::Condition, false)?;
                id
            }
            AstKind::Return => {
                let id = self.new_node(&[Label::Return], n);
                self.slot(id, n.children.first(), EdgeLabel::ReturnValue, false)?;
                id
            }
            AstKind::EmitStmt => {
                let id = self.new_node(&[Label::Emit], n);
                self.slot(id, n.children.first(), EdgeLabel::Ast, false)?;
                id
            }
            AstKind::ExpressionStmt => match n.children.first() {
                Some(e) => return self.expression(e),
                None => return Ok(None),
            },
            AstKind::Break => self.new_node(&[Label::Break], n),
            AstKind::Continue => self.new_node(&[Label::Continue], n),
            AstKind::VarDecl => {
                let id = self.new_node(&[Label::DeclarationStatement], n);
                let v = self.local(n)?;
                self.g.add_edge(id, v, EdgeLabel::Ast);
                self.g.add_indexed_edge(id, v, EdgeLabel::Declarations, 0);
                if let Some(init) = n.children.first() {
                    if let Some(e) = self.expression(init)? {
                        self.child(v, e, Some(EdgeLabel::Initializer));
                    }
                }
                id
            }
            AstKind::TupleVarDecl => {
                let id = self.new_node(&[Label::DeclarationStatement], n);
                let (rhs, decls) = n.children.split_last().expect("tuple declaration has a value");
                let mut vars = Vec::new();
                for (i, d) in decls.iter().enumerate() {
                    if d.kind == AstKind::Empty {
                        continue;
                    }
                    let v = self.local(d)?;
                    self.g.add_edge(id, v, EdgeLabel::Ast);
                    self.g.add_indexed_edge(id, v, EdgeLabel::Declarations, i as u32);
                    vars.push(v);
                }
                if let Some(e) = self.expression(rhs)? {
                    self.g.add_edge(id, e, EdgeLabel::Ast);
                    for v in vars {
                        self.g.add_edge(v, e, EdgeLabel::Initializer);
                    }
                }
                id
            }
            AstKind::Revert if n.children.is_empty() && n.name() == Some("throw") => {
                let id = self.new_node(&[Label::Rollback], n);
                self.names(id, "throw", "throw");
                id
            }
            AstKind::InlineAssembly => self.new_node(&[Label::InlineAssembly], n),
            AstKind::PlaceholderUnderscore => {
                let id = self.new_node(&[Label::Placeholder], n);
                self.names(id, "_", "_");
                id
            }
            AstKind::FunctionDef
            | AstKind::ModifierDef
            | AstKind::ConstructorDef
            | AstKind::ContractDef
            | AstKind::StructDef
            | AstKind::EventDef
            | AstKind::EnumDef
            | AstKind::ErrorDef
            | AstKind::FieldDecl
            | AstKind::ParamDecl
            | AstKind::Pragma
            | AstKind::Directive => {
                return Err(CpgError::Unsupported(format!("{:?} in statement position", n.kind)))
            }
            _ => return self.expression(n),
        };
        Ok(Some(id))
    }

    /// Translates an optional child into `role`; `statement` selects the statement translator.
    fn slot(
        &mut self,
        parent: NodeId,
        child: Option<&AstNode>,
        role: EdgeLabel,
        statement: bool,
    ) -> Result<(), CpgError> {
        let Some(c) = child.filter(|c| c.kind != AstKind::Empty) else {
            return Ok(());
        };
        let id = if statement {
            self.statement(c)?
        } else {
            self.expression(c)?
        };
        if let Some(id) = id {
            let role = (role != EdgeLabel::Ast).then_some(role);
            self.child(parent, id, role);
        }
        Ok(())
    }

    fn local(&mut self, n: &AstNode) -> Result<NodeId, CpgError> {
        let id = self.new_node(&[Label::Variable], n);
        let name = n.name().unwrap_or("");
        self.names(id, name, name);
        if let Some(l) = &n.attrs.location {
            self.g.set_prop(id, "storageLocation", l.as_str());
        }
        self.typed(id, n.attrs.type_name.as_deref());
        Ok(id)
    }

    fn expression(&mut self, n: &AstNode) -> Result<Option<NodeId>, CpgError> {
        let id = match n.kind {
            AstKind::Empty => return Ok(None),
            AstKind::Identifier => {
                let id = self.new_node(&[Label::Reference], n);
                let name = n.name().unwrap_or("");
                let local = if name == "address payable" { "address" } else { name };
                self.names(id, local, local);
                id
            }
            AstKind::Literal => self.literal(n),
            AstKind::MemberAccess => {
                let id = self.new_node(&[Label::Member, Label::Reference], n);
                let code = collapse_ws(self.ast.node_text(n));
                self.names(id, n.name().unwrap_or(""), &code);
                let base = self.expression(&n.children[0])?.expect("member base");
                self.child(id, base, Some(EdgeLabel::Base));
                id
            }
            AstKind::Index => {
                let id = self.new_node(&[Label::Subscript], n);
                let base = self.expression(&n.children[0])?.expect("subscript base");
                self.child(id, base, Some(EdgeLabel::ArrayExpression));
                if let Some(i) = n.children.get(1) {
                    if let Some(ix) = self.expression(i)? {
                        self.child(id, ix, Some(EdgeLabel::SubscriptExpression));
                    }
                }
                id
            }
            AstKind::BinaryOp | AstKind::Assignment => {
                let id = self.new_node(&[Label::BinaryOperator], n);
                let op = n.attrs.operator.as_deref().unwrap_or("");
                self.g.set_prop(id, "operatorCode", op);
                self.names(id, op, op);
                let l = self.expression(&n.children[0])?.expect("lhs");
                let r = self.expression(&n.children[1])?.expect("rhs");
                self.child(id, l, Some(EdgeLabel::Lhs));
                self.child(id, r, Some(EdgeLabel::Rhs));
                id
            }
            AstKind::UnaryOp => {
                let id = self.new_node(&[Label::UnaryOperator], n);
                let op = n.attrs.operator.as_deref().unwrap_or("");
                self.g.set_prop(id, "operatorCode", op);
                self.g.set_prop(id, "isPostfix", !n.attrs.prefix);
                self.names(id, op, op);
                let input = self.expression(&n.children[0])?.expect("operand");
                self.child(id, input, Some(EdgeLabel::Input));
                id
            }
            AstKind::Conditional => {
                let id = self.new_node(&[Label::Conditional], n);
                let c = self.expression(&n.children[0])?.expect("condition");
                self.child(id, c, Some(EdgeLabel::Condition));
                for e in &n.children[1..] {
                    let x = self.expression(e)?.expect("branch");
                    self.child(id, x, None);
                }
                id
            }
            AstKind::Tuple => {
                let id = self.new_node(&[Label::ExpressionList], n);
                for e in &n.children {
                    if let Some(x) = self.expression(e)? {
                        self.child(id, x, None);
                    }
                }
                id
            }
            AstKind::New => {
                let id = self.new_node(&[Label::New], n);
                let tn = n.attrs.type_name.clone().unwrap_or_default();
                self.names(id, &tn, &tn);
                self.typed(id, Some(&tn));
                id
            }
            AstKind::Call => self.call(n)?,
            AstKind::Require | AstKind::Assert | AstKind::Revert => self.rollback_call(n)?,
            AstKind::CallOptions => self.specified(n)?.0,
            other => return Err(CpgError::Unsupported(format!("{other:?} in expression position"))),
        };
        Ok(Some(id))
    }

    fn literal(&mut self, n: &AstNode) -> NodeId {
        let id = self.new_node(&[Label::Literal], n);
        let raw = n.attrs.value.clone().unwrap_or_default();
        let value = match n.attrs.literal_kind.as_deref() {
            Some("bool") => Value::from(raw == "true"),
            Some("number") | Some("address") => number_value(&raw).unwrap_or(Value::from(raw.clone())),
            _ => Value::from(unquote(&raw)),
        };
        self.g.set_prop(id, "value", value);
        self.g.set_prop(id, "literalKind", n.attrs.literal_kind.as_deref().unwrap_or("string"));
        self.names(id, "", "");
        id
    }

    fn call(&mut self, n: &AstNode) -> Result<NodeId, CpgError> {
        let id = self.new_node(&[Label::Call], n);
        let callee_ast = &n.children[0];
        let (callee, local, base, specifiers) = match callee_ast.kind {
            AstKind::MemberAccess => {
                let c = self.expression(callee_ast)?.expect("callee");
                let base = self.g.target(c, EdgeLabel::Base);
                (c, callee_ast.name().unwrap_or("").to_string(), base, Vec::new())
            }
            AstKind::CallOptions => {
                let (c, local, base, kvs) = self.specified(callee_ast)?;
                (c, local, base, kvs)
            }
            AstKind::Identifier => {
                let c = self.expression(callee_ast)?.expect("callee");
                let local = self.g.node(c).local_name().to_string();
                (c, local, None, Vec::new())
            }
            AstKind::New => {
                let c = self.expression(callee_ast)?.expect("callee");
                let local = callee_ast.attrs.type_name.clone().unwrap_or_default();
                (c, local, None, Vec::new())
            }
            _ => {
                let c = self.expression(callee_ast)?.expect("callee");
                (c, String::new(), None, Vec::new())
            }
        };
        let callee_code = self.g.node(callee).code().to_string();
        self.names(id, &local, &callee_code);
        self.child(id, callee, Some(EdgeLabel::Callee));
        if let Some(b) = base {
            self.g.add_edge(id, b, EdgeLabel::Base);
        }
        for kv in specifiers {
            self.g.add_edge(id, kv, EdgeLabel::Specifiers);
        }
        for (i, a) in n.children[1..].iter().enumerate() {
            if let Some(x) = self.expression(a)? {
                self.g.add_edge(id, x, EdgeLabel::Ast);
                self.g.add_indexed_edge(id, x, EdgeLabel::Arguments, i as u32);
            }
        }
        Ok(id)
    }

    /// `expr{key: value, ...}`. Returns (node, localName, base, key-value nodes).
    fn specified(&mut self, n: &AstNode) -> Result<(NodeId, String, Option<NodeId>, Vec<NodeId>), CpgError> {
        let inner = &n.children[0];
        let (id, local, base) = if inner.kind == AstKind::MemberAccess {
            let id = self.new_node(&[Label::Specified, Label::Member, Label::Reference], n);
            let local = inner.name().unwrap_or("").to_string();
            let code = collapse_ws(self.ast.node_text(n));
            self.names(id, &local, &code);
            let b = self.expression(&inner.children[0])?.expect("base");
            self.child(id, b, Some(EdgeLabel::Base));
            (id, local, Some(b))
        } else {
            let id = self.new_node(&[Label::Specified], n);
            let e = self.expression(inner)?.expect("specified expression");
            let local = self.g.node(e).local_name().to_string();
            let code = collapse_ws(self.ast.node_text(n));
            self.names(id, &local, &code);
            self.child(id, e, Some(EdgeLabel::Callee));
            (id, local, None)
        };
        let mut kvs = Vec::new();
        for (key, value) in n.attrs.option_names.iter().zip(&n.children[1..]) {
            let v = self.expression(value)?.expect("option value");
            let kv = self.new_node(&[Label::KeyValue], value);
            let vcode = self.g.node(v).code().to_string();
            self.g.set_prop(kv, "code", format!("{key}: {vcode}"));
            self.names(kv, key, key);
            let k = self.new_node(&[Label::Reference], value);
            self.g.set_prop(k, "code", key.as_str());
            self.g.set_prop(k, "value", key.as_str());
            self.names(k, key, key);
            self.child(kv, k, Some(EdgeLabel::Key));
            self.child(kv, v, Some(EdgeLabel::Value));
            self.child(id, kv, Some(EdgeLabel::Specifiers));
            self.g.add_edge(id, v, EdgeLabel::Value);
            kvs.push(kv);
        }
        Ok((id, local, base, kvs))
    }

    /// `require`/`assert`/`revert`: a call with a Rollback child.
    fn rollback_call(&mut self, n: &AstNode) -> Result<NodeId, CpgError> {
        let id = self.new_node(&[Label::Call], n);
        let name = n.name().unwrap_or("revert").to_string();
        self.names(id, &name, &name);
        let callee = self.g.add_node(&[Label::Reference]);
        self.g.set_prop(callee, "code", name.as_str());
        self.g.set_prop(
            callee,
            "location",
            json!({"line": n.span.line, "column": n.span.column}),
        );
        self.g.set_prop(callee, "isInferred", false);
        self.names(callee, &name, &name);
        self.child(id, callee, Some(EdgeLabel::Callee));
        for (i, a) in n.children.iter().enumerate() {
            if let Some(x) = self.expression(a)? {
                self.g.add_edge(id, x, EdgeLabel::Ast);
                self.g.add_indexed_edge(id, x, EdgeLabel::Arguments, i as u32);
            }
        }
        let rb = self.g.add_node(&[Label::Rollback]);
        self.g.set_prop(rb, "code", "");
        self.g.set_prop(
            rb,
            "location",
            json!({"line": n.span.line, "column": n.span.column}),
        );
        self.g.set_prop(rb, "isInferred", false);
        self.names(rb, "", "");
        self.g.add_edge(id, rb, EdgeLabel::Ast);
        Ok(id)
    }
}

fn qualify(outer: Option<&str>, name: &str) -> String {
    match outer {
        Some(o) if !o.is_empty() => format!("{o}.{name}"),
        _ => name.to_string(),
    }
}

fn unquote(s: &str) -> String {
    let s = s.trim_start_matches("unicode").trim_start_matches("hex");
    let mut out = String::new();
    // adjacent literals were concatenated with their quotes
    let mut chars = s.chars().peekable();
    let mut quote: Option<char> = None;
    while let Some(c) = chars.next() {
        match quote {
            None if c == '"' || c == '\'' => quote = Some(c),
            None => {}
            Some(q) if c == q => quote = None,
            Some(_) if c == '\\' => {
                if let Some(n) = chars.next() {
                    out.push(n);
                }
            }
            Some(_) => out.push(c),
        }
    }
    out
}

const UNIT_FACTORS: &[(&str, f64)] = &[
    ("wei", 1.0),
    ("gwei", 1e9),
    ("szabo", 1e12),
    ("finney", 1e15),
    ("ether", 1e18),
    ("seconds", 1.0),
    ("minutes", 60.0),
    ("hours", 3600.0),
    ("days", 86400.0),
    ("weeks", 604800.0),
    ("years", 31536000.0),
];

/// Numeric value of a literal such as `1_000`, `0xff`, `2e3` or `1 ether`.
pub(crate) fn number_value(raw: &str) -> Option<Value> {
    let mut parts = raw.split_whitespace();
    let digits = parts.next()?.replace('_', "");
    let factor = match parts.next() {
        Some(u) => UNIT_FACTORS.iter().find(|(n, _)| *n == u)?.1,
        None => 1.0,
    };
    let base: f64 = if let Some(hex) = digits.strip_prefix("0x").or_else(|| digits.strip_prefix("0X")) {
        if hex.len() > 13 {
            return None;
        }
        u64::from_str_radix(hex, 16).ok()? as f64
    } else {
        digits.parse().ok()?
    };
    let v = base * factor;
    if v.fract() == 0.0 && v.abs() < 9.007_199_254_740_992e15 {
        Some(Value::from(v as i64))
    } else {
        serde_json::Number::from_f64(v).map(Value::Number)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_values() {
        assert_eq!(number_value("100"), Some(Value::from(100)));
        assert_eq!(number_value("1_000"), Some(Value::from(1000)));
        assert_eq!(number_value("0xff"), Some(Value::from(255)));
        assert_eq!(number_value("2 days"), Some(Value::from(172800)));
        assert_eq!(number_value("0.5"), Some(json!(0.5)));
    }

    #[test]
    fn unquote_handles_escapes_and_concatenation() {
        assert_eq!(unquote("\"a\\\"b\""), "a\"b");
        assert_eq!(unquote("'x''y'"), "xy");
    }
}
