from halognn.cli import main

main()
