#!/usr/bin/env python3
"""Regenerates the binary capture fixtures under tests/data.

Frames are assembled and written with scapy, and the expected field values
are taken from scapy's own dissection of the written file, so the C++
parsers are checked against an independent implementation. Run from the
repository root:

    python3 tests/fixtures/make_fixtures.py
"""

import json
import os

from scapy.all import ARP, Dot1Q, Ether, IP, IPv6, TCP, UDP, rdpcap
from scapy.utils import PcapNgWriter, PcapWriter

OUT = os.path.join(os.path.dirname(__file__), "..", "data")
BCAST = "ff:ff:ff:ff:ff:ff"
BASE = 1_500_000_000  # capture epoch used by every fixture


def write_pcap(path, frames, **kw):
    w = PcapWriter(path, sync=True, linktype=1, **kw)
    for f in frames:
        w.write(f)
    w.close()


def dissect(pkt):
    """Field dump from scapy's dissector, or the frame kind."""
    if ARP not in pkt:
        return {"kind": "not_arp"}
    a = pkt[ARP]
    if (a.hwtype, a.ptype, a.hwlen, a.plen) != (1, 0x0800, 6, 4):
        return {"kind": "malformed"}
    return {
        "kind": "arp",
        "hardware_type": a.hwtype,
        "protocol_type": a.ptype,
        "opcode": a.op,
        "sender_mac": a.hwsrc.upper(),
        "sender_ip": a.psrc,
        "target_mac": a.hwdst.upper(),
        "target_ip": a.pdst,
        "frame_destination": pkt[Ether].dst.upper(),
        "frame_source": pkt[Ether].src.upper(),
    }


def truncated_arp(src, n):
    """ARP EtherType with only `n` body bytes."""
    full = bytes(Ether(dst=BCAST, src=src) / ARP(op=1, hwsrc=src,
                                                 psrc="192.168.0.99",
                                                 pdst="192.168.0.1"))
    return Ether(full[: 14 + n])


def arp_frames():
    """Hand-picked request / reply / garbage frames."""
    frames = [
        # Broadcast request from a testbed CPU.
        Ether(dst=BCAST, src="28:63:36:c6:c7:d4")
        / ARP(op=1, hwsrc="28:63:36:c6:c7:d4", psrc="192.168.0.10",
              hwdst="00:00:00:00:00:00", pdst="192.168.0.1"),
        # Unicast reply.
        Ether(dst="28:63:36:c6:c7:d4", src="00:1c:06:35:c0:7c")
        / ARP(op=2, hwsrc="00:1c:06:35:c0:7c", psrc="192.168.0.11",
              hwdst="28:63:36:c6:c7:d4", pdst="192.168.0.10"),
        # Gratuitous ARP.
        Ether(dst=BCAST, src="00:30:de:0c:aa:68")
        / ARP(op=1, hwsrc="00:30:de:0c:aa:68", psrc="192.168.0.30",
              hwdst="00:00:00:00:00:00", pdst="192.168.0.30"),
        # 802.1Q tagged request.
        Ether(dst=BCAST, src="00:80:f4:0e:58:89") / Dot1Q(vlan=42)
        / ARP(op=1, hwsrc="00:80:f4:0e:58:89", psrc="192.168.0.50",
              pdst="192.168.0.51"),
        # IPv4 TCP.
        Ether(dst="00:1c:06:35:c0:7c", src="28:63:36:c6:c7:d4")
        / IP(src="192.168.0.10", dst="192.168.0.11") / TCP(dport=102),
        # Truncated ARP body.
        truncated_arp("00:a0:45:9d:40:74", 20),
        # ARP with hardware length 8.
        Ether(dst=BCAST, src="00:24:59:0a:4c:b7")
        / ARP(op=1, hwlen=8, hwsrc="00:24:59:0a:4c:b7:00:00",
              psrc="192.168.0.21", pdst="192.168.0.1"),
    ]
    kinds = ["arp", "arp", "arp", "arp", "not_arp", "malformed", "malformed"]
    return frames, kinds


def mixed_frames():
    """100 frames with a known mix; returns frames and per-frame kinds."""
    frames, kinds = [], []
    for i in range(100):
        host = "00:30:de:0c:00:%02x" % (i + 1)
        ip = "10.0.0.%d" % (i + 1)
        r = i % 10
        if r in (0, 1, 2):
            f = Ether(dst=BCAST, src=host) / ARP(op=1, hwsrc=host, psrc=ip,
                                                 pdst="10.0.0.254")
            k = "arp"
        elif r == 3:
            f = Ether(dst="00:30:de:00:00:01", src=host) / ARP(
                op=2, hwsrc=host, psrc=ip, hwdst="00:30:de:00:00:01",
                pdst="10.0.0.254")
            k = "arp"
        elif r == 4:
            f = truncated_arp(host, (i * 7) % 28)
            k = "malformed"
        elif r == 5:
            f = Ether(dst=BCAST, src=host) / ARP(op=1, ptype=0x86DD, plen=16,
                                                 hwsrc=host)
            k = "malformed"
        elif r == 6:
            f = Ether(dst="00:30:de:00:00:01", src=host) / IP(src=ip) / TCP()
            k = "not_arp"
        elif r == 7:
            f = Ether(dst="00:30:de:00:00:01", src=host) / IP(src=ip) / UDP()
            k = "not_arp"
        elif r == 8:
            f = Ether(dst="33:33:00:00:00:01", src=host) / IPv6() / UDP()
            k = "not_arp"
        else:
            f = Ether(dst=BCAST, src=host) / Dot1Q(vlan=7) / ARP(
                op=1, hwsrc=host, psrc=ip, pdst="10.0.0.254")
            k = "arp"
        f.time = BASE + i
        frames.append(f)
        kinds.append(k)
    return frames, kinds


def arp_request(mac, ip, t):
    f = Ether(dst=BCAST, src=mac) / ARP(op=1, hwsrc=mac, psrc=ip,
                                        pdst="192.168.0.1")
    f.time = t
    return f


def tcp(t):
    f = (Ether(dst="00:1c:06:35:c0:7c", src="28:63:36:c6:c7:d4")
         / IP(src="192.168.0.10", dst="192.168.0.11") / TCP(dport=502))
    f.time = t
    return f


def main():
    os.makedirs(OUT, exist_ok=True)

    # Single 42-byte ARP request, microsecond pcap and pcap-ng.
    single = arp_request("28:63:36:c6:c7:d4", "192.168.0.10", 0)
    single.time = BASE + 0.123456
    write_pcap(os.path.join(OUT, "single_arp.pcap"), [single])
    w = PcapNgWriter(os.path.join(OUT, "single_arp.pcapng"))
    w.write(single)
    w.close()
    rd = rdpcap(os.path.join(OUT, "single_arp.pcap"))
    assert len(rd) == 1 and len(bytes(rd[0])) == 42
    rdng = rdpcap(os.path.join(OUT, "single_arp.pcapng"))
    single_meta = {
        "count": 1,
        "length": len(bytes(rd[0])),
        "sec": int(rd[0].time),
        "usec": int(round((rd[0].time - int(rd[0].time)) * 1_000_000)),
        "pcapng_sec": int(rdng[0].time),
        "pcapng_usec": int(round((rdng[0].time - int(rdng[0].time)) * 1_000_000)),
        "bytes_hex": bytes(rd[0]).hex(),
        "dissection": dissect(rd[0]),
    }

    # Same packet, big-endian nanosecond pcap.
    single_ns = arp_request("28:63:36:c6:c7:d4", "192.168.0.10", 0)
    from decimal import Decimal
    single_ns.time = Decimal(BASE) + Decimal("0.123456789")
    write_pcap(os.path.join(OUT, "single_arp_be_ns.pcap"), [single_ns],
               endianness=">", nano=True)

    # Header-only captures.
    write_pcap(os.path.join(OUT, "empty.pcap"), [])

    # Request / reply / garbage frames.
    frames, kinds = arp_frames()
    for i, f in enumerate(frames):
        f.time = BASE + i
    write_pcap(os.path.join(OUT, "arp_frames.pcap"), frames)
    back = rdpcap(os.path.join(OUT, "arp_frames.pcap"))
    frame_meta = []
    for pkt, kind in zip(back, kinds):
        d = dissect(pkt)
        if kind != "arp":
            d = {"kind": kind}
        assert d["kind"] == kind, (d, kind)
        frame_meta.append(d)

    # 100-frame mix.
    mixed, mixed_kinds = mixed_frames()
    write_pcap(os.path.join(OUT, "mixed100.pcap"), mixed)
    back = rdpcap(os.path.join(OUT, "mixed100.pcap"))
    per_frame = []
    for pkt, kind in zip(back, mixed_kinds):
        d = dissect(pkt) if kind == "arp" else {"kind": kind}
        assert d["kind"] == kind
        per_frame.append(d)
    mixed_meta = {
        "total": len(mixed_kinds),
        "arp_valid": mixed_kinds.count("arp"),
        "malformed": mixed_kinds.count("malformed"),
        "not_arp": mixed_kinds.count("not_arp"),
        "frames": per_frame,
    }

    # Synthetic analysis bundle: one device, three broadcast requests at
    # t = 0, 10, 30 plus seven TCP packets.
    bundle = os.path.join(OUT, "bundle")
    os.makedirs(bundle, exist_ok=True)
    pkts = [arp_request("28:63:36:c6:c7:d4", "192.168.0.10", BASE + t)
            for t in (0, 10, 30)]
    pkts += [tcp(BASE + t) for t in (1, 2, 3, 11, 12, 31, 32)]
    pkts.sort(key=lambda p: p.time)
    write_pcap(os.path.join(bundle, "capture.pcap"), pkts)

    # Two devices: A at 0,10,30 (gaps 10,20); B at 5,60 (gap 55).
    two = [arp_request("28:63:36:c6:c7:d4", "192.168.0.10", BASE + t)
           for t in (0, 10, 30)]
    two += [arp_request("00:1c:06:35:c0:7c", "192.168.0.11", BASE + t)
            for t in (5, 60)]
    two += [arp_request("00:30:de:0c:aa:68", "192.168.0.30", BASE + 42)]
    two.sort(key=lambda p: p.time)
    write_pcap(os.path.join(OUT, "two_devices.pcap"), two)

    with open(os.path.join(OUT, "expected.json"), "w") as fh:
        json.dump({"single_arp": single_meta, "arp_frames": frame_meta,
                   "mixed100": mixed_meta}, fh, indent=1, sort_keys=True)
        fh.write("\n")


if __name__ == "__main__":
    main()
