import subprocess
import sys


def main():
    status = 0
    # 1) 代数定律  2) 随机博弈对拍  3) 三个基准输入
    for script in ("scripts/run_laws.py", "scripts/run_oracle.py", "scripts/run_bench.py"):
        rc = subprocess.run([sys.executable, script, "--config", "config/default.yaml"]).returncode
        print(f"[checks] {script} exit={rc}", flush=True)
        status = status or rc
    if status == 0:
        print("[checks] finished")
    raise SystemExit(status)


if __name__ == "__main__":
    main()
