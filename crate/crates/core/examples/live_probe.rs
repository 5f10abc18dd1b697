//! Drives the live WebSocket endpoint the way the browser client does: load
//! the liver, grab a vertex and pull it in a few increments.

use hyperfem::live::protocol::{decode_server, encode_client, Tags};
use hyperfem::live::{ClientMessage, Server, ServerMessage};
use hyperfem::mesh::MeshSource;
use tungstenite::{connect, Message};

fn main() {
    let addr = Server::bind("127.0.0.1:0", 1500).unwrap().spawn().unwrap();
    let (mut ws, _) = connect(format!("ws://{addr}")).unwrap();
    let mut send = |msg: ClientMessage| {
        ws.send(Message::text(encode_client(&msg))).unwrap();
        loop {
            if let Message::Text(t) = ws.read().unwrap() {
                return decode_server(t.as_str()).unwrap();
            }
        }
    };

    let scene = send(ClientMessage::LoadScene {
        mesh: MeshSource::Liver,
        material: None,
        clamp: Tags::default(),
    });
    let ServerMessage::Scene { dofs, surface_vertices, .. } = scene else {
        panic!("{scene:?}")
    };
    println!("liver scene: {dofs} DOFs, {} surface vertices", surface_vertices.len());

    for k in 1..=5 {
        let force = [0.0, 0.0, 0.05 * k as f64];
        send(ClientMessage::SetProbe {
            vertex: None,
            point: Some([0.1, 0.05, 0.08]),
            force,
        });
        match send(ClientMessage::Step) {
            ServerMessage::State { reaction, iters, ms, .. } => {
                println!("F_z = {:.2} N: {iters} iterations, {ms:.1} ms, reaction {:+.4} N", force[2], reaction[2])
            }
            other => println!("{other:?}"),
        }
    }
}
