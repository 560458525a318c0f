import sys

# 让 python 能找到 src/
sys.path.append("src")

from cli.main import main

if __name__ == "__main__":
    sys.exit(main(["laws", *sys.argv[1:]]))
