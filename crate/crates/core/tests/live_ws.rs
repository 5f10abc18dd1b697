use std::net::{SocketAddr, TcpStream};

use hyperfem::live::protocol::{decode_server, encode_client, Tags};
use hyperfem::live::{ClientMessage, Server, ServerMessage};
use hyperfem::materials::MaterialConfig;
use hyperfem::elements::CellFamily;
use hyperfem::mesh::{MeshSource, BEAM_DIMS};
use tungstenite::stream::MaybeTlsStream;
use tungstenite::{connect, Message, WebSocket};

type Socket = WebSocket<MaybeTlsStream<TcpStream>>;

const CAP: usize = 1500;

fn server() -> SocketAddr {
    Server::bind("127.0.0.1:0", CAP)
        .unwrap()
        .with_base(env!("CARGO_MANIFEST_DIR"))
        .spawn()
        .unwrap()
}

fn open(addr: SocketAddr) -> Socket {
    connect(format!("ws://{addr}")).unwrap().0
}

fn exchange_text(ws: &mut Socket, text: &str) -> ServerMessage {
    ws.send(Message::text(text)).unwrap();
    loop {
        if let Message::Text(t) = ws.read().unwrap() {
            return decode_server(t.as_str()).unwrap();
        }
    }
}

fn exchange(ws: &mut Socket, msg: &ClientMessage) -> ServerMessage {
    exchange_text(ws, &encode_client(msg))
}

fn liver_file(material: Option<MaterialConfig>) -> ClientMessage {
    ClientMessage::LoadScene {
        mesh: MeshSource::File("assets/liver.msh".into()),
        material,
        clamp: Tags::default(),
    }
}

/// First unclamped surface vertex, as a mesh vertex id.
fn free_vertex(scene: &ServerMessage) -> usize {
    let ServerMessage::Scene {
        surface_vertices, clamped, ..
    } = scene
    else {
        panic!("expected scene, got {scene:?}")
    };
    let i = (0..surface_vertices.len()).find(|i| !clamped.contains(i)).unwrap();
    surface_vertices[i]
}

fn probe(ws: &mut Socket, vertex: usize, force: [f64; 3]) {
    let reply = exchange(
        ws,
        &ClientMessage::SetProbe {
            vertex: Some(vertex),
            point: None,
            force,
        },
    );
    assert_eq!(reply, ServerMessage::Probe { vertex, force });
}

fn step(ws: &mut Socket) -> (Vec<f64>, [f64; 3], usize) {
    match exchange(ws, &ClientMessage::Step) {
        ServerMessage::State {
            positions,
            reaction,
            iters,
            converged: true,
            ..
        } => (positions, reaction, iters),
        other => panic!("step failed: {other:?}"),
    }
}

#[test]
fn liver_file_loads_with_fibers_material() {
    let addr = server();
    let mut ws = open(addr);
    let scene = exchange(&mut ws, &liver_file(Some(MaterialConfig::builtin("ho"))));
    let ServerMessage::Scene {
        material,
        dofs,
        surface_vertices,
        positions,
        triangles,
        ..
    } = &scene
    else {
        panic!("{scene:?}")
    };
    assert_eq!(material, "ho");
    assert_eq!(*dofs, 543);
    assert_eq!(positions.len(), 3 * surface_vertices.len());
    assert!(triangles.iter().all(|&t| t < surface_vertices.len()));
    let v = free_vertex(&scene);
    probe(&mut ws, v, [0.0, -0.1, 0.0]);
    let (_, reaction, _) = step(&mut ws);
    assert!((reaction[1] - 0.1).abs() < 1e-8, "{reaction:?}");
}

#[test]
fn warm_started_steps_stay_cheap() {
    let mut ws = open(server());
    let scene = exchange(&mut ws, &liver_file(None));
    let v = free_vertex(&scene);
    for k in 1..=5 {
        probe(&mut ws, v, [0.0, -0.1 * k as f64, 0.0]);
        let (_, reaction, iters) = step(&mut ws);
        assert!(iters <= 5, "step {k}: {iters} iterations");
        assert!((reaction[1] - 0.1 * k as f64).abs() < 1e-8);
    }
}

#[test]
fn final_state_is_path_independent() {
    let addr = server();
    let run = |ramp: &[f64]| {
        let mut ws = open(addr);
        let scene = exchange(&mut ws, &liver_file(None));
        let v = free_vertex(&scene);
        let mut last = Vec::new();
        for &f in ramp {
            probe(&mut ws, v, [0.0, 0.0, f]);
            last = step(&mut ws).0;
        }
        last
    };
    let a = run(&[0.1, 0.2, 0.3, 0.4]);
    let b = run(&[0.25, 0.05, 0.4]);
    let diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-9, "{diff}");
}

#[test]
fn reset_returns_to_rest() {
    let mut ws = open(server());
    let scene = exchange(&mut ws, &liver_file(None));
    let ServerMessage::Scene { positions: rest, .. } = &scene else { panic!() };
    let v = free_vertex(&scene);
    probe(&mut ws, v, [0.05, 0.0, 0.0]);
    let (moved, _, _) = step(&mut ws);
    assert!(moved.iter().zip(rest).any(|(a, b)| (a - b).abs() > 1e-6));
    let after = exchange(&mut ws, &ClientMessage::Reset);
    assert!(matches!(after, ServerMessage::State { .. }), "{after:?}");
    let (again, reaction, _) = step(&mut ws);
    assert_eq!(reaction, [0.0; 3]);
    let diff = again.iter().zip(rest).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-12, "{diff}");
}

#[test]
fn refuses_bad_requests() {
    let mut ws = open(server());
    let is_error = |m: ServerMessage| matches!(m, ServerMessage::Error { .. });
    assert!(is_error(exchange(&mut ws, &ClientMessage::Step)));
    assert!(is_error(exchange_text(&mut ws, r#"{"v":2,"type":"step"}"#)));
    assert!(is_error(exchange_text(&mut ws, r#"{"type":"step"}"#)));
    assert!(is_error(exchange_text(&mut ws, "[1,2,3]")));

    let big = ClientMessage::LoadScene {
        mesh: MeshSource::Beam {
            family: CellFamily::P2Tet,
            counts: [12, 2, 2],
        },
        material: None,
        clamp: Tags::default(),
    };
    match exchange(&mut ws, &big) {
        ServerMessage::Error { message } => assert!(message.contains("1875"), "{message}"),
        other => panic!("{other:?}"),
    }

    let small = ClientMessage::LoadScene {
        mesh: MeshSource::Beam {
            family: CellFamily::Q1Hex,
            counts: [4, 1, 1],
        },
        material: None,
        clamp: Tags::Many(vec!["clamp".into()]),
    };
    let scene = exchange(&mut ws, &small);
    let ServerMessage::Scene { surface_vertices, clamped, positions, .. } = &scene else { panic!("{scene:?}") };
    let c = surface_vertices[clamped[0]];
    assert_eq!(positions[3 * clamped[0]], 0.0);
    assert!(is_error(exchange(
        &mut ws,
        &ClientMessage::SetProbe {
            vertex: Some(c),
            point: None,
            force: [0.0, 1.0, 0.0]
        }
    )));
    // snapping by point picks the loaded-end corner
    let reply = exchange(
        &mut ws,
        &ClientMessage::SetProbe {
            vertex: None,
            point: Some([BEAM_DIMS[0] + 1.0, BEAM_DIMS[1] + 1.0, BEAM_DIMS[2] + 1.0]),
            force: [0.0, -1.0, 0.0],
        },
    );
    let ServerMessage::Probe { vertex, .. } = reply else { panic!("{reply:?}") };
    let i = surface_vertices.iter().position(|&s| s == vertex).unwrap();
    assert_eq!(positions[3 * i..3 * i + 3], BEAM_DIMS);
}
