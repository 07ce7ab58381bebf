#!/usr/bin/env python3
"""Writes the hand-set default weights for the three-block gamma network.

Block 1 takes luminance and blurs it, block 2 passes the blurred luminance
through another blur, and the head maps it to log-gamma so dark pixels get
gamma ~0.4 and white pixels gamma 1.
"""
import argparse
import json
import math


def conv(k, cin, cout, padding, mode, inputs, weights, bias):
    assert len(weights) == cout * cin * k * k
    return {
        "kind": "conv", "k": k, "cin": cin, "cout": cout, "stride": 1,
        "padding": padding, "padding_mode": mode, "groups": 1,
        "dense_inputs": inputs, "weights": weights, "bias": bias,
    }


def relu(channels, source):
    return {
        "kind": "activation", "activation": "relu", "k": 1, "cin": channels,
        "cout": channels, "stride": 1, "padding": 0, "padding_mode": "zero",
        "groups": 1, "dense_inputs": [source],
    }


def build(dark_gamma):
    slope = -math.log(dark_gamma)
    blur = [1.0 / 9.0] * 9
    head = []
    for _ in range(3):
        head += [0.0, 0.0, 0.0, slope]
    return {
        "version": 1,
        "gamma_range": [0.25, 4.0],
        "layers": [
            conv(1, 3, 1, 0, "zero", [0], [0.299, 0.587, 0.114], [0.0]),
            relu(1, 1),
            conv(3, 1, 1, 1, "reflect", [2], blur, [0.0]),
            relu(1, 3),
            conv(1, 4, 1, 0, "zero", [0, 4], [0.0, 0.0, 0.0, 1.0], [0.0]),
            relu(1, 5),
            conv(3, 1, 1, 1, "zero", [6], blur, [0.0]),
            relu(1, 7),
            conv(1, 4, 3, 0, "zero", [0, 8], head, [-slope] * 3),
        ],
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="models/default_weights.json")
    parser.add_argument("--dark-gamma", type=float, default=0.4)
    args = parser.parse_args()
    with open(args.out, "w") as f:
        json.dump(build(args.dark_gamma), f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
