#!/usr/bin/env python3
"""Scripted language server for client tests.

fake/echo returns its params. fake/hold parks a request until fake/release,
which answers itself first and then the parked ones, newest first.
fake/crash exits without answering. fake/silent never answers.
"""
import json
import sys
import time

out = sys.stdout.buffer
inp = sys.stdin.buffer
held = []
config_reply = None


def write(msg, chunked=False):
    body = json.dumps(msg).encode()
    data = b"Content-Length: %d\r\n\r\n" % len(body) + body
    if not chunked:
        out.write(data)
        out.flush()
        return
    # dribble the frame so the client sees partial headers and bodies
    for i in range(0, len(data), 7):
        out.write(data[i:i + 7])
        out.flush()
        time.sleep(0.001)


def read():
    length = None
    while True:
        line = inp.readline()
        if not line:
            return None
        line = line.strip()
        if not line:
            break
        name, _, value = line.partition(b":")
        if name.lower() == b"content-length":
            length = int(value)
    return json.loads(inp.read(length))


def reply(msg, result=None, error=None, chunked=False):
    r = {"jsonrpc": "2.0", "id": msg["id"]}
    if error is not None:
        r["error"] = error
    else:
        r["result"] = result
    write(r, chunked)


def publish(doc):
    write({"jsonrpc": "2.0", "method": "textDocument/publishDiagnostics",
           "params": {"uri": doc["uri"], "version": doc["version"],
                      "diagnostics": [{"range": {"start": {"line": 0, "character": 0},
                                                 "end": {"line": 0, "character": 1}},
                                       "severity": 2, "message": "v%d" % doc["version"]}]}})


while True:
    msg = read()
    if msg is None:
        break
    method = msg.get("method")
    if "id" in msg and method is None:
        if msg["id"] == "cfg":
            config_reply = msg.get("result")
        continue
    if method == "initialize":
        write({"jsonrpc": "2.0", "id": "cfg", "method": "workspace/configuration",
               "params": {"items": [{"section": "fake.flag"}, {"section": "missing"}]}})
        reply(msg, {"capabilities": {"renameProvider": True}, "serverInfo": {"name": "fake"}})
    elif method == "fake/echo":
        reply(msg, msg.get("params"), chunked=True)
    elif method == "fake/config":
        reply(msg, config_reply)
    elif method == "fake/hold":
        held.append(msg)
    elif method == "fake/release":
        reply(msg, len(held))
        for m in reversed(held):
            reply(m, m["params"])
        held.clear()
    elif method == "fake/fail":
        reply(msg, error={"code": -32000, "message": "scripted failure"})
    elif method == "fake/notify":
        for i in range(msg["params"]["count"]):
            write({"jsonrpc": "2.0", "method": "window/logMessage", "params": {"type": 4, "message": str(i)}})
        reply(msg, None)
    elif method == "fake/crash":
        sys.exit(3)
    elif method == "fake/silent":
        pass
    elif method == "textDocument/didOpen":
        publish(msg["params"]["textDocument"])
    elif method == "textDocument/didChange":
        publish(msg["params"]["textDocument"])
    elif method == "shutdown":
        reply(msg, None)
    elif method == "exit":
        break
    elif "id" in msg:
        reply(msg, error={"code": -32601, "message": "unknown " + str(method)})
