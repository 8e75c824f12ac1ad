from qcong.cli import main

main()
