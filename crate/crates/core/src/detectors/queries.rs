//! One pattern per detector, transcribed clause by clause from the reference
//! queries. Clause order follows the source queries so the two can be read
//! side by side.

use serde_json::Value;

use crate::cpg::EdgeLabel::{self, *};
use crate::cpg::Label::{self, *};
use crate::graphquery::pattern::*;

const EOG_INV: &[EdgeLabel] = &[Eog, Invokes];
const EOG_INV_RET: &[EdgeLabel] = &[Eog, Invokes, Returns];
const TO_WRITE_TARGET: &[EdgeLabel] = &[Base, Callee, Lhs, ArrayExpression];
const WRITE_OPS: &[&str] = &["=", "|=", "^=", "&=", "<<=", ">>=", "+=", "-=", "*=", "/=", "%="];
const INC_DEC: &[&str] = &["++", "--"];

fn code(v: &str, c: &str) -> NodePattern {
    node(v).eq("code", c)
}

fn any_code(c: &str) -> NodePattern {
    anon().eq("code", c)
}

fn lacks(var: &str, l: Label) -> Cond {
    not(has_label(var, l))
}

fn name_in(var: &str, names: &[&str]) -> Cond {
    prop(var, "localName", PropOp::In, strs(names))
}

fn upper_name_in(var: &str, names: &[&str]) -> Cond {
    prop(var, "localName", PropOp::InUpper, strs(names))
}

fn op_in(var: &str, ops: &[&str]) -> Cond {
    prop(var, "operatorCode", PropOp::In, strs(ops))
}

fn not_internal(var: &str) -> Cond {
    not(prop(var, "code", PropOp::HeaderContains, " internal "))
}

/// A label test against a label no node carries.
fn never() -> Cond {
    or(vec![])
}

fn param_edge(var: &str) -> PathStep {
    PathStep::new(Direction::Out, &[Parameters]).bind(var)
}

/// `r` is the last parameter of `f` and comes after the address parameter `adr`.
fn last_param_after_address(r: &str) -> Cond {
    and(vec![
        not_exists(
            Pattern::new()
                .chain(node("f").step(param_edge("rp")).to(anon()))
                .filter(edge_index("rp", Cmp::Gt, r)),
        ),
        edge_index("adr", Cmp::Lt, r),
    ])
}

/// Field declared in the record that contains `c`.
fn field_of_callers_record() -> Cond {
    exists_chain(
        node("field")
            .inc(&[Fields])
            .to(anon().label(Record))
            .out_star(&[Ast])
            .to(node("c")),
    )
}

/// `(from)-[:DFG*]->(bin)-[...]->()...<-[:DFG*]-(sink)` write-through-operator shapes.
fn binary_write_into(from: &str, sink: NodePattern) -> Pattern {
    Pattern::new()
        .chain(
            node(from)
                .out_star(&[Dfg])
                .to(node("bin").label(BinaryOperator))
                .out(&[Lhs])
                .to(anon())
                .out_star(TO_WRITE_TARGET)
                .to(anon())
                .inc_star(&[Dfg])
                .to(sink),
        )
        .filter(op_in("bin", WRITE_OPS))
}

fn unary_write_into(from: &str, sink: NodePattern) -> Pattern {
    Pattern::new()
        .chain(
            node(from)
                .out_star(&[Dfg])
                .to(node("bin").label(UnaryOperator))
                .out(&[Input, Base, Callee, Lhs, ArrayExpression])
                .to(anon())
                .inc_star(&[Dfg])
                .to(sink),
        )
        .filter(op_in("bin", INC_DEC))
}

/// `exp` is a call with no resolved target or whose target has no body.
fn external_call(exp: &str) -> Cond {
    or(vec![
        no_out(exp, &[Invokes]),
        exists(
            Pattern::new()
                .chain(node(exp).out(&[Invokes]).to(node("target")))
                .filter(no_out("target", &[Body])),
        ),
    ])
}

/// `r` flows into a branch whose one side reaches `int` and whose other side cannot.
fn flows_into_guarding_branch(r: &str) -> Cond {
    exists(
        Pattern::new()
            .chain(
                node(r)
                    .out_star(&[Dfg])
                    .to(node("branch"))
                    .out(&[Eog])
                    .to(node("th"))
                    .out_star(&[Eog])
                    .to(node("int")),
            )
            .filter(exists(
                Pattern::new()
                    .chain(node("branch").out(&[Eog]).to(node("el")))
                    .filter(differ("el", "th"))
                    .filter(or(vec![has_label("int", Rollback), has_label("int", Call)]))
                    .filter(not(exists_chain(node("el").out_star(&[Eog]).to(node("int"))))),
            )),
    )
}

pub(crate) fn access_control_state_write() -> Pattern {
    Pattern::new()
        .chain(
            node("entry")
                .label(Function)
                .out_star(EOG_INV_RET)
                .to(node("wN"))
                .out_star(EOG_INV_RET)
                .to(node("last"))
                .path("p"),
        )
        .filter(lacks("entry", Constructor))
        .filter(not_internal("entry"))
        .filter(no_out("last", EOG_INV))
        .filter(exists_chain(
            node("wN")
                .out(&[Dfg])
                .to(anon().label(Field))
                .inc(&[RefersTo])
                .to(anon())
                .inc(&[Lhs, Rhs])
                .to(anon().label(BinaryOperator).eq("operatorCode", "=="))
                .out(&[Lhs, Rhs])
                .to(any_code("msg.sender")),
        ))
        .filter(not_exists(
            Pattern::new()
                .chain(
                    any_code("msg.sender")
                        .out_star(&[Dfg])
                        .to(node("n"))
                        .inc_star(&[Dfg])
                        .to(anon().label(Field)),
                )
                .chain(
                    node("n")
                        .out_star(&[Dfg])
                        .to(node("comp"))
                        .out_star(EOG_INV_RET)
                        .to(node("t"))
                        .path("alt"),
                )
                .filter(in_path("comp", "p"))
                .filter(or(vec![has_label("t", Rollback), not(in_path("wN", "alt"))])),
        ))
        .returns(&["entry"])
}

pub(crate) fn access_control_selfdestruct() -> Pattern {
    Pattern::new()
        .chain(
            node("f")
                .label(Function)
                .out_star(EOG_INV)
                .to(node("c").label(Call))
                .out_star(EOG_INV)
                .to(node("last"))
                .path("p"),
        )
        .filter(upper_name_in("c", &["SELFDESTRUCT", "SUICIDE"]))
        .filter(no_out("last", EOG_INV))
        .filter(lacks("last", Rollback))
        .filter(not_exists(
            Pattern::new()
                .chain(
                    any_code("msg.sender")
                        .out_star(&[Dfg])
                        .to(node("n"))
                        .out_star(EOG_INV)
                        .to(node("t")),
                )
                .filter(in_path("n", "p"))
                .filter(no_out("t", EOG_INV))
                .filter(exists(
                    Pattern::new()
                        .chain(
                            node("f")
                                .out_star(EOG_INV)
                                .to(node("n"))
                                .out_star(EOG_INV)
                                .to(node("t"))
                                .path("alt"),
                        )
                        .filter(or(vec![has_label("t", Rollback), not(in_path("c", "alt"))])),
                )),
        ))
        .returns(&["c"])
}

/// Length check on message data that can stop the flow before `target`.
fn msg_data_length_guard(target: &str) -> Cond {
    not_exists(
        Pattern::new()
            .chain(any_code("msg.data.length").out_star(&[Dfg]).to(node("n")))
            .filter(in_path("n", "p"))
            .filter(exists(
                Pattern::new()
                    .chain(node("n").out_star(EOG_INV).to(node("t")).path("alt"))
                    // the reference query tests the label 'ROLLBACK', which no node has
                    .filter(or(vec![
                        never(),
                        and(vec![not(in_path(target, "alt")), no_out("t", EOG_INV)]),
                    ])),
            )),
    )
}

fn address_param_head() -> ChainBuilder {
    anon()
        .eq("localName", "address")
        .inc(&[EdgeLabel::Type])
        .to(node("ad"))
        .step(PathStep::new(Direction::In, &[Parameters]).bind("adr"))
        .to(node("f").label(Function))
}

fn ends_function(last: &str) -> Cond {
    or(vec![
        has_label(last, Return),
        exists_chain(node("f").out(&[Body]).to(node(last))),
    ])
}

pub(crate) fn short_address_call() -> Pattern {
    let param_to = |tail: ChainBuilder| -> Pattern {
        Pattern::new().chain(tail).filter(last_param_after_address("r"))
    };
    let head = || node("f").step(param_edge("r")).to(node("param").label(Param)).out_star(&[Dfg]).to(anon());
    Pattern::new()
        .chain(
            address_param_head()
                .out_star(EOG_INV)
                .to(node("c").label(Call))
                .out_star(EOG_INV)
                .to(node("last"))
                .path("p"),
        )
        .filter(ends_function("last"))
        .filter(not_internal("f"))
        .filter(or(vec![
            and(vec![
                upper_name_in("c", &["TRANSFER", "SEND"]),
                exists(param_to(head().inc(&[Arguments]).to(node("c")))),
            ]),
            exists(
                param_to(head().inc(&[Value]).to(node("s")).out(&[Key]).to(anon().eq("value", "value")))
                    .filter(exists_chain(node("s").inc(&[]).to(node("c")))),
            ),
            and(vec![
                upper_name_in("c", &["VALUE"]),
                exists(param_to(
                    head()
                        .inc(&[Arguments])
                        .to(node("c"))
                        .out_star(&[Base, Callee])
                        .to(anon().eq("localName", "call")),
                )),
            ]),
        ]))
        .filter(msg_data_length_guard("c"))
        .filter(exists_chain(
            node("c")
                .out_star(&[Base, Callee])
                .to(anon())
                .inc_star(&[Dfg])
                .to(anon().label(Param)),
        ))
        .returns(&["c"])
}

pub(crate) fn short_address_state() -> Pattern {
    Pattern::new()
        .chain(address_param_head().out_star(EOG_INV).to(node("last")).path("p"))
        .filter(ends_function("last"))
        .filter(exists(
            Pattern::new()
                .chain(
                    node("f")
                        .step(param_edge("vulna"))
                        .to(node("vuln"))
                        .out_star(&[Dfg])
                        .to(node("m"))
                        .out_star(&[Dfg])
                        .to(node("state").label(Field)),
                )
                .filter(last_param_after_address("vulna"))
                .filter(msg_data_length_guard("m")),
        ))
        .returns(&["ad"])
}

pub(crate) fn bad_randomness() -> Pattern {
    let money_call = exists(
        Pattern::new()
            .chain(node("int").label(Call))
            .filter(name_in("int", &["value", "send", "transfer", "call"]))
            .filter(or(vec![
                exists_chain(
                    node("r")
                        .out_star(&[Dfg])
                        .to(anon())
                        .inc_star(&[Base, Callee, Arguments, Specifiers, Value])
                        .to(node("int")),
                ),
                flows_into_guarding_branch("r"),
            ])),
    );
    Pattern::new()
        .chain(node("r"))
        .filter(or(vec![
            and(vec![
                or(vec![has_label("r", Reference), has_label("r", Member)]),
                prop(
                    "r",
                    "code",
                    PropOp::In,
                    strs(&["block.timestamp", "block.number", "block.difficulty", "block.coinbase"]),
                ),
            ]),
            and(vec![has_label("r", Call), name_in("r", &["blockhash"])]),
        ]))
        .filter(or(vec![
            exists(
                Pattern::new()
                    .chain(
                        node("r")
                            .out_star(&[Dfg])
                            .to(anon().label(Return))
                            .inc_star(&[Eog])
                            .to(node("containing").label(Function)),
                    )
                    .filter(prop("containing", "code", PropOp::Contains, "rand")),
            ),
            exists(
                Pattern::new()
                    .chain(node("r").out_star(&[Dfg, Arguments]).to(node("f").label(Field)))
                    .filter(no_out("f", &[Dfg])),
            ),
            money_call,
        ]))
        .returns(&["r"])
}

const MONEY_CALLS: &[&str] = &["transfer", "send", "call"];

pub(crate) fn dos_blocking_call() -> Pattern {
    Pattern::new()
        .chain(node("c").label(Call).out_star(&[Eog]).to(node("c2").label(Call)))
        .filter(name_in("c", MONEY_CALLS))
        .filter(name_in("c2", MONEY_CALLS))
        .filter(or(vec![
            not(name_in("c", &["transfer", "send"])),
            exists(
                Pattern::new()
                    .chain(
                        node("c")
                            .out(&[Dfg])
                            .to(node("branchNeg"))
                            .out(&[Eog])
                            .to(node("next"))
                            .path("avoidingpath"),
                    )
                    .filter(not(exists_chain(node("next").out_star(&[Eog]).to(node("c2"))))),
            ),
        ]))
        .returns(&["c"])
}

pub(crate) fn dos_blocking_state() -> Pattern {
    Pattern::new()
        .chain(
            node("c")
                .label(Call)
                .out_star(&[Eog])
                .to(node("write1"))
                .out(&[Dfg])
                .to(node("f").label(Field)),
        )
        .filter(or(vec![
            name_in("c", &["transfer"]),
            and(vec![
                prop("c", "localName", PropOp::Eq, "send"),
                exists(
                    Pattern::new()
                        .chain(
                            node("c")
                                .out(&[Dfg])
                                .to(node("branchNeg"))
                                .out_star(&[Eog])
                                .to(node("last"))
                                .path("avoidingpath"),
                        )
                        .filter(no_out("last", &[Eog]))
                        .filter(not(in_path("write1", "avoidingpath"))),
                ),
            ]),
        ]))
        .filter(not_exists(
            Pattern::new()
                .chain(
                    node("f")
                        .inc(&[Dfg])
                        .to(node("write2"))
                        .out_star(&[Eog])
                        .to(node("func").label(Function))
                        .path("alt"),
                )
                .filter(lacks("f", Constructor))
                .filter(not(in_path("c", "alt")))
                .filter(not(exists_chain(
                    node("write2")
                        .out_star(&[Eog])
                        .to(node("branching"))
                        .out_star(&[Eog])
                        .to(node("c")),
                ))),
        ))
        .returns(&["c"])
}

pub(crate) fn unchecked_return() -> Pattern {
    Pattern::new()
        .chain(node("c").label(Call).out_star(&[Eog]).to(node("last")).path("p"))
        .filter(no_out("last", &[Eog]))
        .filter(lacks("last", Rollback))
        .filter(not_exists(
            Pattern::new()
                .chain(node("c").out_star(&[Dfg]).to(node("r").label(Return)))
                .filter(in_path("r", "p")),
        ))
        .filter(not_exists(
            Pattern::new()
                .chain(node("c").out_star(&[Dfg]).to(node("n")).out(&[Eog]).to(node("apath")))
                .filter(in_path("n", "p"))
                .filter(exists(
                    Pattern::new()
                        .chain(node("n").out(&[Eog]).to(node("otherpath")))
                        .filter(differ("apath", "otherpath")),
                )),
        ))
        .filter(or(vec![
            name_in("c", &["call", "callcode", "delegatecall", "send"]),
            and(vec![
                name_in("c", &["value", "gas"]),
                exists_chain(node("c").out_star(&[Base, Callee]).to(anon().eq("localName", "call"))),
            ]),
        ]))
        .returns(&["c"])
}

pub(crate) fn dos_gas_loop(threshold: f64) -> Pattern {
    Pattern::new()
        .chain(
            node("b")
                .out_star(&[Eog])
                .to(node("cond"))
                .out(&[Eog])
                .to(node("b"))
                .path("p"),
        )
        .filter(or(vec![
            has_label("b", For),
            has_label("b", While),
            has_label("b", Do),
            has_label("b", ForEach),
        ]))
        .filter(or(vec![
            exists(
                Pattern::new()
                    .chain(node("exp").out(&[Dfg]).to(anon().label(Field)))
                    .filter(in_path("exp", "p")),
            ),
            exists(Pattern::new().chain(node("exp").label(Call)).filter(or(vec![
                and(vec![in_path("exp", "p"), no_out("exp", &[Invokes])]),
                exists(
                    Pattern::new()
                        .chain(node("exp").out(&[Invokes]).to(node("target")))
                        .filter(no_out("target", &[Body])),
                ),
            ]))),
        ]))
        .filter(or(vec![
            exists(
                Pattern::new()
                    .chain(node("l").label(Literal).out(&[Dfg]).to(node("cond").label(BinaryOperator)))
                    .filter(op_in("cond", &["<", "<=", ">", ">="]))
                    .filter(prop("l", "value", PropOp::Gt, Value::from(threshold))),
            ),
            exists(
                Pattern::new()
                    .chain(
                        node("cond")
                            .inc_star(&[Dfg])
                            .to(node("userC").label(Param))
                            .inc(&[Parameters])
                            .to(node("f").label(Function)),
                    )
                    .filter(lacks("f", Constructor)),
            ),
        ]))
        .returns(&["b"])
}

pub(crate) fn default_proxy_delegate() -> Pattern {
    Pattern::new()
        .chain(
            node("f")
                .label(Function)
                .out_star(EOG_INV)
                .to(node("c").label(Call))
                .out_star(EOG_INV)
                .to(node("last"))
                .path("p"),
        )
        .filter(prop("f", "localName", PropOp::IsNullOrEmpty, Value::Null))
        .filter(upper_name_in("c", &["DELEGATECALL", "CALLCODE"]))
        .filter(no_out("last", EOG_INV))
        .filter(lacks("last", Rollback))
        .filter(or(vec![
            exists_chain(any_code("msg.data").inc(&[Arguments]).to(node("c"))),
            exists_chain(
                any_code("msg.data")
                    .out_star(&[Dfg])
                    .to(anon())
                    .inc(&[Arguments])
                    .to(node("c")),
            ),
        ]))
        .filter(not_exists(
            Pattern::new()
                .chain(
                    code("source", "msg.data")
                        .out_star(&[Dfg])
                        .to(node("n"))
                        .out(&[Eog])
                        .to(node("apath"))
                        .path("df"),
                )
                .filter(in_path("n", "p"))
                .filter(not_exists(
                    Pattern::new()
                        .chain(node("otherf").any_label(&[Function, Call]))
                        .filter(in_path("otherf", "df")),
                ))
                .filter(not(exists_chain(
                    node("source").inc(&[Base]).to(any_code("msg.data.length")),
                )))
                .filter(exists(
                    Pattern::new()
                        .chain(
                            node("f")
                                .out_star(EOG_INV)
                                .to(node("n"))
                                .out_star(EOG_INV)
                                .to(node("otherpath"))
                                .path("d"),
                        )
                        .filter(no_out("otherpath", EOG_INV))
                        .filter(or(vec![not(in_path("c", "d")), has_label("otherpath", Rollback)])),
                )),
        ))
        .returns(&["c"])
}

pub(crate) fn dos_empty_collection() -> Pattern {
    Pattern::new()
        .chain(
            node("b")
                .label(BinaryOperator)
                .eq("operatorCode", "=")
                .out(&[Lhs])
                .to(anon())
                .out(&[Dfg])
                .to(node("state").label(Field))
                .out(&[EdgeLabel::Type])
                .to(node("t"))
                .path("p"),
        )
        .filter(prop("t", "code", PropOp::Contains, "["))
        .filter(exists(
            Pattern::new()
                .chain(
                    node("c")
                        .label(Call)
                        .out(&[Base, Callee, Arguments])
                        .to(anon())
                        .inc_star(&[Dfg])
                        .to(node("state")),
                )
                .filter(name_in("c", MONEY_CALLS)),
        ))
        .filter(not(exists_chain(
            node("f").label(Constructor).out_star(&[Eog]).to(node("b")),
        )))
        .returns(&["b"])
}

pub(crate) fn front_running() -> Pattern {
    let sender_keyed_write = exists(
        Pattern::new()
            .chain(
                node("int")
                    .label(BinaryOperator)
                    .eq("operatorCode", "=")
                    .out(&[Lhs])
                    .to(anon())
                    .inc_star(&[Dfg])
                    .to(code("sourcer", "msg.sender")),
            )
            .filter(not_exists(
                Pattern::new()
                    .chain(
                        node("int")
                            .label(BinaryOperator)
                            .out(&[Rhs])
                            .to(node("rhs"))
                            .inc_star(&[Dfg])
                            .to(node("source")),
                    )
                    .filter(or(vec![
                        prop("source", "code", PropOp::Eq, "msg.sender"),
                        prop("source", "code", PropOp::Eq, "msg.value"),
                    ])),
            )),
    );
    let payout_to_sender = exists(
        Pattern::new()
            .chain(
                node("int")
                    .label(Call)
                    .out_star(&[Base, Callee])
                    .to(code("target", "msg.sender")),
            )
            .filter(or(vec![
                and(vec![
                    name_in("int", &["value", "send", "transfer", "call"]),
                    not(exists_chain(
                        any_code("msg.sender")
                            .out_star(&[Dfg])
                            .to(anon())
                            .inc(&[Arguments])
                            .to(node("int")),
                    )),
                ]),
                exists(
                    Pattern::new()
                        .chain(
                            node("int")
                                .out_star(&[Base, Callee])
                                .to(anon())
                                .out(&[Specifiers])
                                .to(node("kv").label(KeyValue))
                                .out(&[Key])
                                .to(anon().eq("localName", "value")),
                        )
                        .filter(not(exists_chain(
                            any_code("msg.sender")
                                .out_star(&[Dfg])
                                .to(anon())
                                .inc(&[Value])
                                .to(node("kv")),
                        ))),
                ),
            ])),
    );
    Pattern::new()
        .chain(
            node("f")
                .label(Function)
                .out_star(&[Eog])
                .to(node("int"))
                .out_star(&[Eog])
                .to(node("last"))
                .path("p"),
        )
        .filter(lacks("f", Constructor))
        .filter(no_out("last", &[Eog]))
        .filter(or(vec![sender_keyed_write, payout_to_sender]))
        .filter(not_exists(
            Pattern::new()
                .chain(
                    node("f")
                        .out_star(&[Eog])
                        .to(node("branch"))
                        .out_star(&[Eog])
                        .to(node("altlast"))
                        .path("alt"),
                )
                .chain(code("source", "msg.sender").out_star(&[Dfg]).to(node("branch")))
                .filter(no_out("altlast", &[Eog]))
                .filter(in_path("branch", "p"))
                .filter(in_path("source", "p"))
                .filter(or(vec![not(in_path("int", "alt")), has_label("altlast", Rollback)])),
        ))
        .returns(&["int"])
}

pub(crate) fn local_struct_write() -> Pattern {
    let written = |f: &str| {
        or(vec![
            exists_chain(node(f).out_star(&[Eog]).to(anon()).out(&[Dfg]).to(node("v"))),
            exists(
                Pattern::new()
                    .chain(
                        node(f)
                            .out_star(&[Eog])
                            .to(anon())
                            .out(&[Dfg])
                            .to(node("bin").label(BinaryOperator))
                            .out(&[Lhs])
                            .to(anon())
                            .out_star(TO_WRITE_TARGET)
                            .to(anon())
                            .inc_star(&[Dfg])
                            .to(node("v")),
                    )
                    .filter(op_in("bin", WRITE_OPS)),
            ),
            exists(
                Pattern::new()
                    .chain(
                        node(f)
                            .out_star(&[Eog])
                            .to(anon())
                            .out(&[Dfg])
                            .to(node("bin").label(UnaryOperator))
                            .out(&[Input, Base, Callee, Lhs, ArrayExpression])
                            .to(anon())
                            .inc_star(&[Dfg])
                            .to(node("v")),
                    )
                    .filter(op_in("bin", INC_DEC)),
            ),
        ])
    };
    Pattern::new()
        .chain(node("v").label(Variable))
        .filter(or(vec![
            and(vec![
                has_label("v", Param),
                prop("v", "code", PropOp::Contains, " storage "),
            ]),
            and(vec![
                lacks("v", Param),
                lacks("v", Field),
                not_exists(
                    Pattern::new()
                        .chain(node("dc").either(&[Ast]).to(node("v")))
                        .filter(or(vec![
                            prop("dc", "code", PropOp::Contains, " memory "),
                            prop("dc", "code", PropOp::Contains, " calldata "),
                        ])),
                ),
            ]),
        ]))
        .filter(no_out("v", &[Initializer]))
        .filter(or(vec![
            prop("v", "code", PropOp::Contains, "["),
            exists(
                Pattern::new()
                    .chain(node("v").out(&[EdgeLabel::Type]).to(node("tv")))
                    .filter(exists(
                        Pattern::new()
                            .chain(node("struct").label(Record).eq("kind", "struct"))
                            .filter(prop("struct", "kind", PropOp::Eq, "struct"))
                            .filter(props_equal("struct", "localName", "tv", "localName")),
                    )),
            ),
        ]))
        .filter(exists(
            Pattern::new()
                .chain(node("f"))
                .filter(lacks("f", Constructor))
                .filter(written("f")),
        ))
        .returns(&["v"])
}

pub(crate) fn over_underflow() -> Pattern {
    let unresolved_sink = |c: &str| no_out_chain(node(c).out(&[Invokes]).to(anon()).out(&[Body]).to(anon()));
    let relevant = or(vec![
        exists_chain(node("b").out_star(&[Dfg]).to(anon().label(Field))),
        exists(
            Pattern::new()
                .chain(
                    node("b")
                        .out_star(&[Dfg])
                        .to(node("bin").label(BinaryOperator))
                        .out(&[Dfg])
                        .to(anon())
                        .out(&[Eog])
                        .to(anon().label(Rollback)),
                )
                .filter(op_in("bin", &["<", ">", "<=", ">=", "=="])),
        ),
        exists(binary_write_into("b", anon().label(Field))),
        exists(unary_write_into("b", anon().label(Field))),
        exists(
            Pattern::new()
                .chain(node("b").out_star(&[Dfg]).to(anon()).inc(&[Arguments]).to(node("c").label(Call)))
                .filter(unresolved_sink("c")),
        ),
        exists(
            Pattern::new()
                .chain(node("b").inc(&[Arguments]).to(node("c").label(Call)))
                .filter(unresolved_sink("c")),
        ),
        exists_chain(node("b").out_star(&[Dfg]).to(anon()).inc(&[Value]).to(anon().label(Specified))),
        exists_chain(node("b").inc(&[Value]).to(anon().label(Specified))),
    ]);
    let shares_origin = |c: &str| {
        exists_chain(
            node("b")
                .inc_star(&[Dfg])
                .to(anon())
                .out_star(&[Dfg])
                .to(node(c)),
        )
    };
    let guard = Pattern::new()
        .chain(
            node("f")
                .out_star(&[Eog])
                .to(node("cond").label(BinaryOperator))
                .out(&[Eog])
                .to(node("branch"))
                .out_star(&[Eog])
                .to(node("l"))
                .path("bpath"),
        )
        .chain(node("c1").inc(&[Lhs, Rhs]).to(node("cond")).out(&[Lhs, Rhs]).to(node("c2")))
        .filter(differ("c1", "c2"))
        .filter(in_path("branch", "p"))
        .filter(no_out("l", &[Eog]))
        .filter(or(vec![not(in_path("b", "bpath")), has_label("l", Rollback)]))
        .filter(not_exists(
            Pattern::new()
                .chain(node("dfOrigin").out_star(&[Dfg]).to(node("b")))
                .filter(not(exists_chain(anon().out(&[Dfg]).to(node("dfOrigin")))))
                .filter(not(exists_chain(node("dfOrigin").out_star(&[Dfg]).to(node("branch"))))),
        ))
        .filter(or(vec![
            not(exists_chain(node("b").out_star(&[Dfg]).to(node("branch")))),
            and(vec![shares_origin("c1"), shares_origin("c2")]),
            and(vec![
                exists_chain(anon().label(Literal).out(&[Dfg]).to(node("cond"))),
                exists_chain(anon().label(Literal).out(&[Dfg]).to(node("b"))),
            ]),
        ]));
    Pattern::new()
        .chain(
            node("f")
                .label(Function)
                .out_star(&[Eog])
                .to(node("b").label(BinaryOperator))
                .out_star(&[Eog])
                .to(node("last"))
                .path("p"),
        )
        .filter(not(exists_chain(node("last").out_star(&[Eog]).to(anon()))))
        .filter(op_in("b", &["+", "+=", "-", "-=", "*", "*="]))
        .filter(exists(
            Pattern::new()
                .chain(
                    node("b")
                        .inc_star(&[Dfg])
                        .to(node("param").label(Param))
                        .inc(&[])
                        .to(node("argf").label(Function)),
                )
                .filter(lacks("f", Constructor))
                .filter(not_internal("argf")),
        ))
        .filter(relevant)
        .filter(not(exists(guard)))
        .returns(&["b"])
}

fn no_out_chain(c: impl Into<Chain>) -> Cond {
    not(exists_chain(c))
}

pub(crate) fn reentrancy() -> Pattern {
    let state_write_after = or(vec![
        exists(
            Pattern::new()
                .chain(node("n").out_star(&[Dfg]).to(node("field").label(Field)))
                .filter(field_of_callers_record()),
        ),
        exists(binary_write_into("n", node("field").label(Field)).filter(field_of_callers_record())),
        exists(unary_write_into("n", node("field").label(Field)).filter(field_of_callers_record())),
    ]);
    let receiver_origin = exists(
        Pattern::new()
            .chain(
                node("s")
                    .out_star(&[Dfg])
                    .to(node("b2"))
                    .inc(&[Base])
                    .to(node("callee"))
                    .inc(&[Callee])
                    .to(node("c"))
                    .path("dflow"),
            )
            .filter(or(vec![
                exists_chain(node("b2").out(&[EdgeLabel::Type]).to(anon().eq("name", "address"))),
                exists_chain(
                    node("b2")
                        .out(&[EdgeLabel::Type])
                        .to(anon().label(ObjectType))
                        .out(&[RecordDeclaration])
                        .to(anon()),
                ),
            ]))
            .filter(not(exists_chain(anon().out(&[Dfg]).to(node("s")))))
            .filter(lacks("s", Literal))
            .filter(not(exists_chain(node("s").inc(&[Parameters]).to(anon().label(Constructor)))))
            .filter(or(vec![
                not(prop("s", "isInferred", PropOp::IsTrue, Value::Null)),
                name_in("s", &["msg", "tx"]),
            ]))
            .filter(not_exists(
                Pattern::new()
                    .chain(
                        node("sub")
                            .out(&[Dfg])
                            .to(node("array"))
                            .out(&[SubscriptExpression])
                            .to(node("sub")),
                    )
                    .filter(in_path("sub", "dflow"))
                    .filter(in_path("array", "dflow")),
            )),
    );
    Pattern::new()
        .chain(
            node("base")
                .label(Member)
                .either(&[Base, Callee])
                .to(node("c").label(Call))
                // a RETURNS hop directly followed by an INVOKES hop is excluded
                .step(PathStep::new(Direction::Out, EOG_INV_RET).star().forbid(Returns, Invokes))
                .to(node("n")),
        )
        .filter(not(exists_chain(node("c").inc(&[]).to(node("em").label(Emit)))))
        .filter(state_write_after)
        .filter(or(vec![
            not(exists_chain(
                anon().out(&[Dfg]).to(node("b1")).inc_star(&[Base, Callee]).to(node("c")),
            )),
            receiver_origin,
        ]))
        .filter(or(vec![
            exists(
                Pattern::new()
                    .chain(node("d").label(Reference).out_star(&[Dfg]).to(node("base")))
                    .filter(prop("d", "code", PropOp::In, strs(&["msg.sender", "tx.origin"]))),
            ),
            exists(
                Pattern::new()
                    .chain(
                        node("t")
                            .eq("localName", "address")
                            .inc(&[EdgeLabel::Type])
                            .to(node("root"))
                            .out_star(&[Dfg])
                            .to(node("base")),
                    )
                    .filter(or(vec![
                        prop("t", "localName", PropOp::Eq, "address"),
                        and(vec![
                            prop("t", "localName", PropOp::Eq, "UNKNOWN"),
                            not(exists_chain(node("root").inc(&[Dfg]).to(anon()))),
                        ]),
                    ])),
            ),
        ]))
        .returns(&["c"])
}

pub(crate) fn time_manipulation() -> Pattern {
    Pattern::new()
        .chain(node("r").label(Reference))
        .filter(prop("r", "code", PropOp::In, strs(&["now", "block.timestamp"])))
        .filter(or(vec![
            exists_chain(node("r").out_star(&[Dfg]).to(anon().label(Return))),
            exists(
                Pattern::new()
                    .chain(node("r").out_star(&[Dfg]).to(node("exp").label(Call)))
                    .filter(external_call("exp")),
            ),
            exists_chain(node("r").out_star(&[Dfg]).to(anon().label(Field))),
            flows_into_guarding_branch("r"),
        ]))
        .returns(&["r"])
}

pub(crate) fn tx_origin() -> Pattern {
    Pattern::new()
        .chain(
            anon()
                .label(Field)
                .inc(&[RefersTo])
                .to(anon())
                .out_star(&[Dfg])
                .to(node("n")),
        )
        .chain(
            anon()
                .label(Member)
                .eq("code", "tx.origin")
                .out_star(&[Dfg])
                .to(node("n")),
        )
        .chain(node("b1").inc(&[Eog]).to(node("n")).out(&[Eog]).to(node("b2")))
        .filter(differ("b1", "b2"))
        .returns(&["n"])
}
